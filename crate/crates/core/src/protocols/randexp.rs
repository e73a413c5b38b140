//! Randomness expansion: Alice stretches a short seed through the toy
//! expander to choose her TFKW questions and test set, measures the hidden
//! subset in the Y eigenbasis (mutually unbiased with every
//! Wiesner-Breidbart state), and keeps those outcomes as her output when the
//! tested rounds pass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::games::OPTIMAL_WIN;
use crate::matrix::{apply_to_factor, StateVector};
use crate::quantum::{self, Pvm};
use crate::{Error, Result};

use super::prg;
use super::runtime::{PartyId, Runtime};
use super::{Adversary, AdversaryKind, QubitPreparation};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RandExpParams {
    /// Total qubits N.
    pub n_qubits: usize,
    /// Output length n = |J|.
    pub n: usize,
    /// Verification slack δ.
    pub delta: f64,
    pub seed: u64,
}

impl RandExpParams {
    pub fn validate(&self) -> Result<()> {
        if self.n >= self.n_qubits {
            return Err(Error::InvalidParams(format!(
                "need n < N, got n = {} and N = {}",
                self.n, self.n_qubits
            )));
        }
        let max_delta = OPTIMAL_WIN - 0.5;
        if self.delta <= 0.0 || self.delta >= max_delta {
            return Err(Error::InvalidParams(format!(
                "need δ ∈ (0, {max_delta:.4}), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Whether Alice's questions come from the toy expander or directly from
/// uniform randomness; the acceptance statistics of concrete adversaries
/// must agree between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuestionSampling {
    ToyPrg,
    Uniform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandExpTranscript {
    pub params: RandExpParams,
    pub adversary: String,
    pub sampling: QuestionSampling,
    /// Seed bits consumed for θ (expander mode).
    pub seed_t: String,
    /// Seed bits consumed for J (expander mode).
    pub seed_u: String,
    pub theta: String,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub y: String,
    #[serde(rename = "yB")]
    pub y_bob: String,
    #[serde(rename = "yC")]
    pub y_charlie: String,
    pub accepted: bool,
    /// y_J when accepted, empty otherwise.
    pub output: String,
    pub seed_bits_consumed: usize,
    /// Output bits per consumed seed bit.
    pub expansion_factor: f64,
    pub win_flags: String,
    pub wins: usize,
    pub threshold: f64,
    pub message_counts: (usize, usize, usize),
}

fn born_prob0(pvm: &Pvm, psi: &StateVector) -> f64 {
    psi.inner(&pvm.element(0).apply(psi)).re.clamp(0.0, 1.0)
}

fn sample_outcome(p0: f64, rng: &mut impl Rng) -> u8 {
    if rng.gen::<f64>() < p0 {
        0
    } else {
        1
    }
}

/// One run of the randomness-expansion protocol.
pub fn run_randexp(
    params: &RandExpParams,
    adversary: &Adversary,
    sampling: QuestionSampling,
) -> Result<RandExpTranscript> {
    params.validate()?;
    let n_total = params.n_qubits;
    let n = params.n;

    let mut adv_rng = crate::matrix::sample::trial_rng(params.seed, 0);
    let mut alice_rng = crate::matrix::sample::trial_rng(params.seed, 1);
    let mut meas_rng = crate::matrix::sample::trial_rng(params.seed, 2);

    let mut runtime = Runtime::new();

    // Provers prepare and are isolated.
    let (preparations, x, phi): (Vec<QubitPreparation>, Vec<u8>, Vec<u8>) = match adversary.kind {
        AdversaryKind::Breidbart => (
            vec![QubitPreparation::Beta; n_total],
            vec![0; n_total],
            vec![0; n_total],
        ),
        AdversaryKind::AllZeros => (
            vec![QubitPreparation::Zero; n_total],
            vec![0; n_total],
            vec![0; n_total],
        ),
        AdversaryKind::Honest | AdversaryKind::HonestWbRandom => {
            let x = bits::random(n_total, &mut adv_rng);
            let phi = bits::random(n_total, &mut adv_rng);
            let preps = x
                .iter()
                .zip(&phi)
                .map(|(&xi, &pi)| QubitPreparation::WiesnerBreidbart { x: xi, phi: pi })
                .collect();
            (preps, x, phi)
        }
        AdversaryKind::EprCollusion => (
            vec![QubitPreparation::EprHalf; n_total],
            Vec::new(),
            Vec::new(),
        ),
    };
    runtime.record_preparation()?;

    // Alice samples (t, u) and computes θ = G_N(t), J = G_b(u) as a subset
    // rank; or draws both uniformly for the comparison arm.
    let rank_bits = prg::subset_rank_bits(n_total, n);
    let (seed_t, seed_u, theta, j, consumed) = match sampling {
        QuestionSampling::ToyPrg => {
            let t = bits::random(prg::seed_length(n_total), &mut alice_rng);
            let u = bits::random(prg::seed_length(rank_bits), &mut alice_rng);
            let theta = prg::toy_prg(&t, n_total)?;
            let j = prg::subset_from_bits(&prg::toy_prg(&u, rank_bits)?, n_total, n);
            let consumed = t.len() + u.len();
            (t, u, theta, j, consumed)
        }
        QuestionSampling::Uniform => {
            let theta = bits::random(n_total, &mut alice_rng);
            let j = prg::uniform_subset(n_total, n, &mut alice_rng);
            (Vec::new(), Vec::new(), theta, j, n_total + rank_bits)
        }
    };
    let mut on_j = vec![false; n_total];
    for &idx in &j {
        on_j[idx] = true;
    }

    // Alice measures: Y eigenbasis on J, conjugate-coding bases on the
    // tested rounds.
    let (y0, y1) = quantum::y_basis();
    let y_pvm = Pvm::new(vec![y0.projector(), y1.projector()]).expect("orthonormal basis");
    let conj_bases = [quantum::conjugate_basis(0), quantum::conjugate_basis(1)];
    let mut y = vec![0u8; n_total];
    let mut epr_joints: Vec<Option<StateVector>> = vec![None; n_total];
    for i in 0..n_total {
        let basis = if on_j[i] {
            &y_pvm
        } else {
            &conj_bases[theta[i] as usize]
        };
        match &preparations[i] {
            QubitPreparation::EprHalf => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let pair = StateVector::from_real(&[s, 0.0, 0.0, s]);
                let dims = [2usize, 2usize];
                let p0 = {
                    let applied = apply_to_factor(basis.element(0), &pair, &dims, 0);
                    pair.inner(&applied).re.clamp(0.0, 1.0)
                };
                y[i] = sample_outcome(p0, &mut meas_rng);
                let collapsed = apply_to_factor(basis.element(y[i] as usize), &pair, &dims, 0);
                epr_joints[i] = Some(collapsed.normalized());
            }
            prep => {
                let state = prep.alice_state();
                y[i] = sample_outcome(born_prob0(basis, &state), &mut meas_rng);
            }
        }
    }

    // Broadcast (J, θ).
    let payload = {
        let mut buf = Vec::new();
        for &idx in &j {
            buf.extend_from_slice(&(idx as u64).to_le_bytes());
        }
        buf.extend_from_slice(&theta);
        buf
    };
    runtime.broadcast(&payload, &payload)?;

    // Replies.
    let jc_mask: Vec<u8> = on_j.iter().map(|&b| if b { 0 } else { 1 }).collect();
    let (y_bob, y_charlie) = match adversary.kind {
        AdversaryKind::EprCollusion => {
            let mut guess = vec![0u8; n_total];
            for i in 0..n_total {
                let basis = if on_j[i] {
                    &y_pvm
                } else {
                    &conj_bases[theta[i] as usize]
                };
                let joint = epr_joints[i].as_ref().expect("entangled round");
                let applied = apply_to_factor(basis.element(0), joint, &[2, 2], 1);
                let p0 = joint.inner(&applied).re.clamp(0.0, 1.0);
                guess[i] = sample_outcome(p0, &mut meas_rng);
            }
            (guess.clone(), guess)
        }
        AdversaryKind::Breidbart | AdversaryKind::AllZeros => {
            (vec![0u8; n_total], vec![0u8; n_total])
        }
        _ => {
            let reply = quantum::honest_reply(&x, &phi, &theta, &jc_mask);
            (reply.clone(), reply)
        }
    };
    runtime.reply(PartyId::Bob)?;
    runtime.reply(PartyId::Charlie)?;

    // Verification over the tested rounds.
    let mut wins = 0usize;
    let mut win_flags = String::with_capacity(n_total);
    for i in 0..n_total {
        if on_j[i] {
            win_flags.push('.');
        } else if y[i] == y_bob[i] && y[i] == y_charlie[i] {
            wins += 1;
            win_flags.push('1');
        } else {
            win_flags.push('0');
        }
    }
    let threshold = (OPTIMAL_WIN - params.delta) * (n_total - n) as f64;
    let accepted = wins as f64 >= threshold;
    let output: Vec<u8> = if accepted {
        j.iter().map(|&i| y[i]).collect()
    } else {
        Vec::new()
    };

    Ok(RandExpTranscript {
        params: *params,
        adversary: adversary.kind.name().into(),
        sampling,
        seed_t: bits::to_string(&seed_t),
        seed_u: bits::to_string(&seed_u),
        theta: bits::to_string(&theta),
        j,
        y: bits::to_string(&y),
        y_bob: bits::to_string(&y_bob),
        y_charlie: bits::to_string(&y_charlie),
        accepted,
        output: bits::to_string(&output),
        seed_bits_consumed: consumed,
        expansion_factor: n as f64 / consumed as f64,
        win_flags,
        wins,
        threshold,
        message_counts: runtime.counts(),
    })
}
