//! Bitstrings as `Vec<u8>` of 0/1, the lingua franca of questions, answers,
//! basis choices, and protocol strings.

use rand::Rng;

pub fn to_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 0 { '0' } else { '1' })
        .collect()
}

pub fn from_string(s: &str) -> Option<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

pub fn random(len: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..2u8)).collect()
}

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn and(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

pub fn hamming_weight(a: &[u8]) -> usize {
    a.iter().filter(|&&b| b == 1).count()
}

/// Big-endian index of a bitstring: leftmost bit is the most significant,
/// matching the Kronecker-factor order used throughout.
pub fn to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Inverse of [`to_index`] at a fixed length.
pub fn from_index(index: usize, len: usize) -> Vec<u8> {
    (0..len)
        .map(|i| ((index >> (len - 1 - i)) & 1) as u8)
        .collect()
}
