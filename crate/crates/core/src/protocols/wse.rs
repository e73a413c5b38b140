//! Three-party weak string erasure: Bob prepares Wiesner-Breidbart states,
//! Alice measures a hidden subset in the Wiesner-Breidbart bases and tests
//! the rest as TFKW rounds, and the provers' replies decide acceptance.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::games::OPTIMAL_WIN;
use crate::matrix::{apply_to_factor, StateVector};
use crate::quantum::{self, Pvm};
use crate::{Error, Result};

use super::runtime::{PartyId, Runtime};
use super::{Adversary, AdversaryKind, QubitPreparation};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WseParams {
    /// Total qubits N.
    pub n_qubits: usize,
    /// Output length n = |J|.
    pub n: usize,
    /// Verification slack δ.
    pub delta: f64,
    pub seed: u64,
}

impl WseParams {
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

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BobOutput {
    /// Indices into \[n\] where θ and φ agree on J: the substring Bob knows.
    pub iota: Vec<usize>,
    /// Bob's guess of Alice's output string.
    pub xhat: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WseTranscript {
    pub params: WseParams,
    pub adversary: String,
    /// Prover preparation bits; empty for the entangled family.
    pub x: String,
    pub phi: String,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub theta: String,
    pub y: String,
    #[serde(rename = "yB")]
    pub y_bob: String,
    #[serde(rename = "yC")]
    pub y_charlie: String,
    pub accepted: bool,
    pub alice_out: String,
    pub bob_out: BobOutput,
    /// '1'/'0' per tested round, '.' on J.
    pub win_flags: String,
    pub wins: usize,
    pub threshold: f64,
    /// (preparations, broadcasts, replies) recorded by the runtime.
    pub message_counts: (usize, usize, usize),
}

/// Born probability of outcome 0 for a 2-outcome measurement on a pure state.
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

/// Measurement of one half of a maximally entangled pair: Alice's outcome is
/// Born-sampled and the collapsed two-qubit state is returned so the
/// (colluding) provers can measure the partner register.
fn epr_round(alice_basis: &Pvm, rng: &mut impl Rng) -> (u8, StateVector) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pair = StateVector::from_real(&[s, 0.0, 0.0, s]);
    let dims = [2usize, 2usize];
    let p0 = {
        let applied = apply_to_factor(alice_basis.element(0), &pair, &dims, 0);
        pair.inner(&applied).re.clamp(0.0, 1.0)
    };
    let outcome = sample_outcome(p0, rng);
    let collapsed = apply_to_factor(alice_basis.element(outcome as usize), &pair, &dims, 0);
    (outcome, collapsed.normalized())
}

/// Born probability of outcome 0 when measuring the partner half of a
/// collapsed pair.
fn partner_prob0(pvm: &Pvm, joint: &StateVector) -> f64 {
    let applied = apply_to_factor(pvm.element(0), joint, &[2, 2], 1);
    joint.inner(&applied).re.clamp(0.0, 1.0)
}

/// One run of the string-erasure protocol against the given adversary.
pub fn run_wse(params: &WseParams, adversary: &Adversary) -> Result<WseTranscript> {
    params.validate()?;
    let n_total = params.n_qubits;
    let n = params.n;

    let mut adv_rng = crate::matrix::sample::trial_rng(params.seed, 0);
    let mut alice_rng = crate::matrix::sample::trial_rng(params.seed, 1);
    let mut meas_rng = crate::matrix::sample::trial_rng(params.seed, 2);

    let mut runtime = Runtime::new();

    // Joint preparation.
    let (preparations, x, phi): (Vec<QubitPreparation>, Vec<u8>, Vec<u8>) = match adversary.kind {
        AdversaryKind::Honest => {
            let x = bits::random(n_total, &mut adv_rng);
            let phi = bits::random(n_total, &mut adv_rng);
            let preps = x
                .iter()
                .zip(&phi)
                .map(|(&xi, &pi)| QubitPreparation::WiesnerBreidbart { x: xi, phi: pi })
                .collect();
            (preps, x, phi)
        }
        AdversaryKind::HonestWbRandom => {
            // Uniform Wiesner-Breidbart sector per qubit; the implied
            // preparation bits are x = s0, φ = s0 ⊕ s1.
            let mut x = Vec::with_capacity(n_total);
            let mut phi = Vec::with_capacity(n_total);
            let mut preps = Vec::with_capacity(n_total);
            for _ in 0..n_total {
                let s0 = adv_rng.gen_range(0..2u8);
                let s1 = adv_rng.gen_range(0..2u8);
                x.push(s0);
                phi.push(s0 ^ s1);
                preps.push(QubitPreparation::WiesnerBreidbart {
                    x: s0,
                    phi: s0 ^ s1,
                });
            }
            (preps, x, phi)
        }
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
        AdversaryKind::EprCollusion => (
            vec![QubitPreparation::EprHalf; n_total],
            Vec::new(),
            Vec::new(),
        ),
    };
    runtime.record_preparation()?;

    // Alice's choices: a uniform n-subset and uniform bases.
    let mut j: Vec<usize> = rand::seq::index::sample(&mut alice_rng, n_total, n).into_vec();
    j.sort_unstable();
    let mut on_j = vec![false; n_total];
    for &idx in &j {
        on_j[idx] = true;
    }
    let theta = bits::random(n_total, &mut alice_rng);

    // Alice measures: Wiesner-Breidbart bases on J, conjugate-coding on J^c.
    let wb_bases = [quantum::wb_basis(0), quantum::wb_basis(1)];
    let conj_bases = [quantum::conjugate_basis(0), quantum::conjugate_basis(1)];
    let mut y = vec![0u8; n_total];
    let mut epr_partners: Vec<Option<StateVector>> = vec![None; n_total];
    for i in 0..n_total {
        let basis = if on_j[i] {
            &wb_bases[theta[i] as usize]
        } else {
            &conj_bases[theta[i] as usize]
        };
        match &preparations[i] {
            QubitPreparation::EprHalf => {
                let (outcome, partner) = epr_round(basis, &mut meas_rng);
                y[i] = outcome;
                epr_partners[i] = Some(partner);
            }
            prep => {
                let state = prep.alice_state();
                y[i] = sample_outcome(born_prob0(basis, &state), &mut meas_rng);
            }
        }
    }

    // Public broadcast of (J, θ), bit-identical to both provers.
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
            // Both provers read the shared collapsed register and measure in
            // Alice's (now public) bases: a contract violation by design.
            let mut guess = vec![0u8; n_total];
            for i in 0..n_total {
                let basis = if on_j[i] {
                    &wb_bases[theta[i] as usize]
                } else {
                    &conj_bases[theta[i] as usize]
                };
                let joint = epr_partners[i].as_ref().expect("entangled round");
                guess[i] = sample_outcome(partner_prob0(basis, joint), &mut meas_rng);
            }
            (guess.clone(), guess)
        }
        _ => {
            let reply = quantum::honest_reply(&x, &phi, &theta, &jc_mask);
            (reply.clone(), reply)
        }
    };
    runtime.reply(PartyId::Bob)?;
    runtime.reply(PartyId::Charlie)?;

    // Acceptance: simultaneous matches on the tested rounds against the
    // per-round threshold.
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

    // Outputs: Alice keeps y_J; Bob keeps the matching positions and his
    // guess of the string.
    let alice_out: Vec<u8> = j.iter().map(|&i| y[i]).collect();
    let xhat: Vec<u8> = j.iter().map(|&i| y_bob[i]).collect();
    let iota: Vec<usize> = if phi.is_empty() {
        Vec::new()
    } else {
        (0..n).filter(|&k| theta[j[k]] == phi[j[k]]).collect()
    };

    Ok(WseTranscript {
        params: *params,
        adversary: adversary.kind.name().into(),
        x: bits::to_string(&x),
        phi: bits::to_string(&phi),
        j,
        theta: bits::to_string(&theta),
        y: bits::to_string(&y),
        y_bob: bits::to_string(&y_bob),
        y_charlie: bits::to_string(&y_charlie),
        accepted,
        alice_out: bits::to_string(&alice_out),
        bob_out: BobOutput {
            iota,
            xhat: bits::to_string(&xhat),
        },
        win_flags,
        wins,
        threshold,
        message_counts: runtime.counts(),
    })
}

/// Batch summary row: one seeded run per entry, seeds master, master+1, ...
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WseSummary {
    pub seed: u64,
    pub accepted: bool,
    pub wins: usize,
    pub iota_size: usize,
    pub run_ms: f64,
}

impl WseSummary {
    pub fn csv_header() -> &'static str {
        "seed,accepted,wins,iota_size,run_ms"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3}",
            self.seed, self.accepted, self.wins, self.iota_size, self.run_ms
        )
    }
}

pub fn run_wse_batch(
    params: &WseParams,
    adversary: &Adversary,
    runs: usize,
) -> Result<Vec<WseSummary>> {
    let mut out = Vec::with_capacity(runs);
    for k in 0..runs {
        let seeded = WseParams {
            seed: params.seed.wrapping_add(k as u64),
            ..*params
        };
        let start = std::time::Instant::now();
        let t = run_wse(&seeded, adversary)?;
        out.push(WseSummary {
            seed: seeded.seed,
            accepted: t.accepted,
            wins: t.wins,
            iota_size: t.bob_out.iota.len(),
            run_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn honest_params(seed: u64) -> WseParams {
        WseParams {
            n_qubits: 400,
            n: 20,
            delta: 0.05,
            seed,
        }
    }

    #[test]
    fn params_validation() {
        assert!(WseParams {
            n_qubits: 10,
            n: 10,
            delta: 0.05,
            seed: 0
        }
        .validate()
        .is_err());
        assert!(WseParams {
            n_qubits: 10,
            n: 2,
            delta: 0.5,
            seed: 0
        }
        .validate()
        .is_err());
        assert!(honest_params(0).validate().is_ok());
    }

    #[test]
    fn honest_runs_accept_and_match_on_iota() {
        let adv = Adversary::new(AdversaryKind::Honest, false).unwrap();
        let mut accepted = 0;
        let mut iota_total = 0usize;
        let runs = 100;
        for seed in 0..runs as u64 {
            let t = run_wse(&honest_params(seed), &adv).unwrap();
            assert_eq!(t.message_counts, (1, 1, 2));
            assert_eq!(t.y_bob, t.y_charlie);
            if t.accepted {
                accepted += 1;
                // Matched substring: (alice_out)_ι = x̂_ι exactly, and both
                // equal Bob's preparation bits there.
                let alice: Vec<u8> = bits::from_string(&t.alice_out).unwrap();
                let xhat: Vec<u8> = bits::from_string(&t.bob_out.xhat).unwrap();
                let x: Vec<u8> = bits::from_string(&t.x).unwrap();
                for &k in &t.bob_out.iota {
                    assert_eq!(alice[k], xhat[k]);
                    assert_eq!(xhat[k], x[t.j[k]]);
                }
                iota_total += t.bob_out.iota.len();
            }
        }
        assert!(accepted >= 96, "accepted {accepted}/{runs}");
        // |ι| concentrates on n/2 = 10.
        let mean = iota_total as f64 / accepted as f64;
        assert!((mean - 10.0).abs() < 1.5, "mean iota size {mean}");
    }

    #[test]
    fn honest_per_round_win_rate_is_optimal() {
        let adv = Adversary::new(AdversaryKind::Honest, false).unwrap();
        let mut wins = 0usize;
        let mut tested = 0usize;
        for seed in 0..40 {
            let t = run_wse(&honest_params(seed), &adv).unwrap();
            wins += t.wins;
            tested += t.params.n_qubits - t.params.n;
        }
        let rate = wins as f64 / tested as f64;
        let sigma = (OPTIMAL_WIN * (1.0 - OPTIMAL_WIN) / tested as f64).sqrt();
        assert!(
            (rate - OPTIMAL_WIN).abs() <= 4.0 * sigma,
            "win rate {rate} vs {OPTIMAL_WIN}"
        );
    }

    #[test]
    fn all_zeros_adversary_wins_three_quarters_and_gets_rejected() {
        let adv = Adversary::new(AdversaryKind::AllZeros, false).unwrap();
        let mut wins = 0usize;
        let mut tested = 0usize;
        let mut rejected = 0usize;
        let runs: usize = 60;
        for seed in 0..runs as u64 {
            let t = run_wse(&honest_params(seed), &adv).unwrap();
            wins += t.wins;
            tested += t.params.n_qubits - t.params.n;
            if !t.accepted {
                rejected += 1;
            }
        }
        let rate = wins as f64 / tested as f64;
        assert!((rate - 0.75).abs() < 0.02, "rate {rate}");
        assert!(rejected + 2 >= runs, "rejected only {rejected}/{runs}");
    }

    #[test]
    fn epr_collusion_wins_every_round_when_enforcement_is_disabled() {
        let adv = Adversary::new(AdversaryKind::EprCollusion, true).unwrap();
        let params = WseParams {
            n_qubits: 8,
            n: 2,
            delta: 0.05,
            seed: 3,
        };
        for seed in 0..50 {
            let t = run_wse(&WseParams { seed, ..params }, &adv).unwrap();
            assert_eq!(t.wins, 6, "all tested rounds won");
            assert!(t.accepted);
            // It also knows Alice's whole output string.
            assert_eq!(t.bob_out.xhat, t.alice_out);
        }
    }

    #[test]
    fn wb_random_variant_is_indistinguishable_from_honest() {
        let honest = Adversary::new(AdversaryKind::Honest, false).unwrap();
        let variant = Adversary::new(AdversaryKind::HonestWbRandom, false).unwrap();
        let params = WseParams {
            n_qubits: 120,
            n: 12,
            delta: 0.05,
            seed: 17,
        };
        let runs = 150;
        let a: usize = run_wse_batch(&params, &honest, runs)
            .unwrap()
            .iter()
            .filter(|s| s.accepted)
            .count();
        let b: usize = run_wse_batch(&params, &variant, runs)
            .unwrap()
            .iter()
            .filter(|s| s.accepted)
            .count();
        let diff = (a as f64 - b as f64).abs() / runs as f64;
        let sigma = (2.0 * 0.5 * 0.5 / runs as f64).sqrt();
        assert!(diff <= 4.0 * sigma, "accept rates differ by {diff}");
    }

    #[test]
    fn alice_output_is_uniform_over_accepted_runs() {
        // Light version of the uniformity check: n = 4, χ² over 16 cells.
        let adv = Adversary::new(AdversaryKind::Honest, false).unwrap();
        let params = WseParams {
            n_qubits: 48,
            n: 4,
            delta: 0.05,
            seed: 0,
        };
        let mut counts = vec![0u64; 16];
        let mut seed = 0u64;
        let mut collected = 0;
        while collected < 4000 {
            let t = run_wse(&WseParams { seed, ..params }, &adv).unwrap();
            seed += 1;
            if t.accepted {
                let v = bits::from_string(&t.alice_out).unwrap();
                counts[bits::to_index(&v)] += 1;
                collected += 1;
            }
        }
        let stat = crate::stats::chi_square_uniform_stat(&counts);
        let crit = crate::stats::chi_square_critical(15, 0.01);
        assert!(stat < crit, "chi2 {stat} vs {crit}");
    }

    #[test]
    fn iota_is_exactly_the_matching_positions() {
        let adv = Adversary::new(AdversaryKind::Honest, false).unwrap();
        let t = run_wse(&honest_params(5), &adv).unwrap();
        let theta = bits::from_string(&t.theta).unwrap();
        let phi = bits::from_string(&t.phi).unwrap();
        for k in 0..t.params.n {
            let should_match = theta[t.j[k]] == phi[t.j[k]];
            assert_eq!(t.bob_out.iota.contains(&k), should_match);
        }
    }

    #[test]
    fn alice_view_carries_no_information_about_iota() {
        // Exhaustive enumeration at N = 5, n = 4: the honest distribution
        // factors as p(view) · p(ι), so the mutual information vanishes.
        let n_total = 5usize;
        let _n = 4usize;
        use std::collections::HashMap;
        let mut joint: HashMap<(u64, u8), f64> = HashMap::new();
        let mut view_marginal: HashMap<u64, f64> = HashMap::new();
        let mut iota_marginal: HashMap<u8, f64> = HashMap::new();

        let subsets: Vec<Vec<usize>> = (0..n_total)
            .map(|skip| (0..n_total).filter(|&i| i != skip).collect())
            .collect();
        let wb = [quantum::wb_basis(0), quantum::wb_basis(1)];
        let conj = [quantum::conjugate_basis(0), quantum::conjugate_basis(1)];

        let size = 1usize << n_total;
        let outer_weight = 1.0 / (size * size * size * subsets.len()) as f64;
        for x in 0..size {
            let xb = bits::from_index(x, n_total);
            for phi in 0..size {
                let phib = bits::from_index(phi, n_total);
                for theta in 0..size {
                    let thetab = bits::from_index(theta, n_total);
                    for (j_idx, j) in subsets.iter().enumerate() {
                        let on_j: Vec<bool> = (0..n_total).map(|i| j.contains(&i)).collect();
                        // Per-qubit outcome distributions.
                        let p0: Vec<f64> = (0..n_total)
                            .map(|i| {
                                let st =
                                    quantum::wiesner_breidbart_state(&[xb[i]], &[phib[i]]).unwrap();
                                let basis = if on_j[i] {
                                    &wb[thetab[i] as usize]
                                } else {
                                    &conj[thetab[i] as usize]
                                };
                                born_prob0(basis, &st)
                            })
                            .collect();
                        // ι as a bitmask over J's positions.
                        let mut iota_mask = 0u8;
                        for (k, &ji) in j.iter().enumerate() {
                            if thetab[ji] == phib[ji] {
                                iota_mask |= 1 << k;
                            }
                        }
                        let jc_mask: Vec<u8> =
                            on_j.iter().map(|&b| if b { 0 } else { 1 }).collect();
                        let reply = quantum::honest_reply(&xb, &phib, &thetab, &jc_mask);
                        // J^c has exactly one element at these sizes.
                        let jc_pos = (0..n_total).find(|i| !on_j[*i]).unwrap();
                        let reply_bit = reply[jc_pos];
                        for y in 0..size {
                            let yb = bits::from_index(y, n_total);
                            let mut p = outer_weight;
                            for i in 0..n_total {
                                p *= if yb[i] == 0 { p0[i] } else { 1.0 - p0[i] };
                            }
                            if p == 0.0 {
                                continue;
                            }
                            // Alice's view: y, θ, J, and the (equal) replies
                            // on J^c.
                            let view = (y as u64)
                                | ((theta as u64) << 5)
                                | ((j_idx as u64) << 10)
                                | ((reply_bit as u64) << 13);
                            *joint.entry((view, iota_mask)).or_insert(0.0) += p;
                            *view_marginal.entry(view).or_insert(0.0) += p;
                            *iota_marginal.entry(iota_mask).or_insert(0.0) += p;
                        }
                    }
                }
            }
        }
        let mut mi = 0.0;
        for ((view, iota), p) in &joint {
            let pv = view_marginal[view];
            let pi = iota_marginal[iota];
            mi += p * (p / (pv * pi)).log2();
        }
        assert!(mi.abs() < 1e-10, "mutual information {mi}");
        // And ι itself is uniform over subsets of J.
        for (_, p) in iota_marginal {
            assert!((p - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bob_guessing_probability_is_three_quarters_to_the_n() {
        // Per-qubit: Alice's Wiesner-Breidbart outcome matches Bob's x
        // deterministically when θ = φ and uniformly otherwise, so the match
        // probability over exhaustive (θ_J, φ_J) is E 2^{−|θ⊕φ|} = (3/4)^n.
        let wb = [quantum::wb_basis(0), quantum::wb_basis(1)];
        for x in 0..2u8 {
            for phi in 0..2u8 {
                for theta in 0..2u8 {
                    let st = quantum::wiesner_breidbart_state(&[x], &[phi]).unwrap();
                    let p_match = {
                        let p0 = born_prob0(&wb[theta as usize], &st);
                        if x == 0 {
                            p0
                        } else {
                            1.0 - p0
                        }
                    };
                    let expected = if theta == phi { 1.0 } else { 0.5 };
                    assert!((p_match - expected).abs() < 1e-12);
                }
            }
        }
        for n in 1..=6usize {
            let size = 1usize << n;
            let mut acc = 0.0;
            for theta in 0..size {
                for phi in 0..size {
                    acc += 0.5f64.powi((theta ^ phi).count_ones() as i32);
                }
            }
            acc /= (size * size) as f64;
            assert!((acc - 0.75f64.powi(n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn summaries_serialize_to_csv() {
        let adv = Adversary::new(AdversaryKind::Honest, false).unwrap();
        let rows = run_wse_batch(&honest_params(0), &adv, 3).unwrap();
        assert_eq!(rows.len(), 3);
        let line = rows[0].csv_row();
        assert_eq!(line.split(',').count(), 5);
    }
}
