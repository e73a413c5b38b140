//! Toy deterministic expander standing in for a pseudorandom generator, and
//! the combinatorial machinery that turns its output bits into a uniform
//! n-subset of \[N\]. Cryptographic security is explicitly out of scope; the
//! expander only has to be deterministic, documented, and well-mixed.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Nominal seed length of the toy generator.
pub const TOY_SEED_BITS: usize = 64;

/// s(n): bits of seed the toy generator consumes to produce n output bits;
/// capped at the output length so the expander never shrinks.
pub fn seed_length(out_len: usize) -> usize {
    TOY_SEED_BITS.min(out_len)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn absorb_seed(seed: &[u8]) -> u64 {
    // FNV-1a over the bit values, then one finalization round.
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in seed {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h ^= seed.len() as u64;
    splitmix(h)
}

/// Counter-fed mixing expander: the seed is absorbed into a 64-bit state and
/// each output block is the mixed sum of the state and a block counter.
/// Identical inputs give identical outputs.
pub fn toy_prg(seed: &[u8], out_len: usize) -> Result<Vec<u8>> {
    if out_len < seed.len() {
        return Err(Error::InvalidParams(format!(
            "expander output {out_len} shorter than the seed {}",
            seed.len()
        )));
    }
    if seed.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParams("seed must be a bitstring".into()));
    }
    let state = absorb_seed(seed);
    let mut out = Vec::with_capacity(out_len);
    let mut counter = 0u64;
    while out.len() < out_len {
        let block = splitmix(state.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)));
        for bit in (0..64).rev() {
            if out.len() == out_len {
                break;
            }
            out.push(((block >> bit) & 1) as u8);
        }
        counter += 1;
    }
    Ok(out)
}

/// C(n, k) as a big integer.
pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Bits of ⌈lg C(n, k)⌉, the rank width of k-subsets of \[n\].
pub fn subset_rank_bits(n: usize, k: usize) -> usize {
    let c = binomial_big(n, k);
    let bits = c.bits() as usize;
    // bits() gives ⌊lg c⌋ + 1; a power of two needs one bit fewer.
    if c == BigUint::one() << (bits - 1) {
        bits - 1
    } else {
        bits
    }
}

/// Lexicographic unranking in the combinatorial number system: the rank-th
/// k-subset of {0, .., n−1}, ascending.
pub fn unrank_subset(rank: &BigUint, n: usize, k: usize) -> Vec<usize> {
    let mut rank = rank.clone();
    let mut out = Vec::with_capacity(k);
    let mut cur = 0usize;
    let mut remaining = k;
    while remaining > 0 {
        let with_cur = binomial_big(n - cur - 1, remaining - 1);
        if rank < with_cur {
            out.push(cur);
            remaining -= 1;
        } else {
            rank -= with_cur;
        }
        cur += 1;
    }
    out
}

/// Rank of an ascending k-subset; inverse of [`unrank_subset`].
pub fn rank_subset(subset: &[usize], n: usize) -> BigUint {
    let k = subset.len();
    let mut rank = BigUint::zero();
    let mut prev = 0usize;
    for (pos, &element) in subset.iter().enumerate() {
        for skipped in prev..element {
            rank += binomial_big(n - skipped - 1, k - pos - 1);
        }
        prev = element + 1;
    }
    rank
}

/// Interpret expander output bits as a subset: big-endian integer, reduced
/// modulo C(n, k), unranked.
pub fn subset_from_bits(bits: &[u8], n: usize, k: usize) -> Vec<usize> {
    let mut value = BigUint::zero();
    for &b in bits {
        value = (value << 1) + BigUint::from(b);
    }
    let rank = value % binomial_big(n, k);
    unrank_subset(&rank, n, k)
}

/// Uniform n-subset rank drawn directly (for comparing expander-sampled and
/// uniformly-sampled question distributions).
pub fn uniform_subset(n: usize, k: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let c = binomial_big(n, k);
    // Rejection sampling on the rank width keeps the draw exactly uniform.
    let bits = c.bits() as usize;
    loop {
        let mut value = BigUint::zero();
        for _ in 0..bits {
            value = (value << 1) + BigUint::from(rng.gen_range(0..2u8));
        }
        if value < c {
            return unrank_subset(&value, n, k);
        }
    }
}
