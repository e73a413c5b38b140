//! Probability-tail machinery: Hoeffding's inequality, the observed-statistics
//! bound that converts winning counts into per-round guarantees, its
//! parameter-regime table, and min-entropy for classical-classical joints.

use num_bigint::{BigInt, BigUint, ToBigInt};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::games::OPTIMAL_WIN;
use crate::{Error, Result, TOL};

/// Pr(Γ − EΓ ≥ t) ≤ e^{−2t²/n} for n independent \[0,1\]-valued variables.
pub fn hoeffding_bound(n: usize, t: f64) -> f64 {
    assert!(t >= 0.0, "threshold must be nonnegative");
    (-2.0 * t * t / n as f64).exp()
}

/// Parameters of the observed-statistics lemma.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObsParams {
    /// Number of parallel rounds tested.
    pub n: usize,
    /// Per-round optimality gap ε.
    pub eps: f64,
    /// Allowed fraction η of bad rounds.
    pub eta: f64,
    /// Statistical slack δ in the acceptance threshold.
    pub delta: f64,
}

impl ObsParams {
    pub fn new(n: usize, eps: f64, eta: f64, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) || eps == 0.0 || !(0.0..1.0).contains(&eta) || eta == 0.0 {
            return Err(Error::InvalidParams(
                "need 0 < ε, η < 1 in the observed-statistics lemma".into(),
            ));
        }
        if delta > eta * eps {
            return Err(Error::InvalidParams(format!(
                "need δ ≤ ηε, got δ = {delta} > {}",
                eta * eps
            )));
        }
        Ok(ObsParams { n, eps, eta, delta })
    }
}

/// Pr(W ≥ (cos²(π/8) − δ)n) ≤ e^{−2n(ηε−δ)²} when fewer than (1−η)n rounds
/// win within ε of optimal.
pub fn obs_bound(p: &ObsParams) -> f64 {
    let gap = p.eta * p.eps - p.delta;
    (-2.0 * p.n as f64 * gap * gap).exp()
}

/// Monte Carlo of the lemma's coupling argument: the winning indicators are
/// dominated by independent Bernoulli variables at 𝔴* on the good rounds and
/// 𝔴* − ε on the rest; the exceedance frequency of their sum must stay under
/// the analytic bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingReport {
    pub bound: f64,
    pub empirical: f64,
    /// Standard error scale of the estimator at the bound.
    pub sigma: f64,
    pub trials: usize,
    pub seed: u64,
    /// empirical ≤ bound + 3σ.
    pub within: bool,
}

pub fn obs_coupling_simulation(
    p: &ObsParams,
    e_size: usize,
    trials: usize,
    seed: u64,
) -> Result<CouplingReport> {
    let n = p.n;
    if e_size as f64 >= (1.0 - p.eta) * n as f64 {
        return Err(Error::InvalidParams(format!(
            "lemma hypothesis needs |E| < (1−η)n = {}, got {e_size}",
            (1.0 - p.eta) * n as f64
        )));
    }
    let good = Binomial::new(e_size as u64, OPTIMAL_WIN)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    let bad = Binomial::new((n - e_size) as u64, OPTIMAL_WIN - p.eps)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    let threshold = (OPTIMAL_WIN - p.delta) * n as f64;
    let mut rng = crate::matrix::sample::rng(seed);
    let mut exceed = 0usize;
    for _ in 0..trials {
        let wins = good.sample(&mut rng) + bad.sample(&mut rng);
        if wins as f64 >= threshold {
            exceed += 1;
        }
    }
    let bound = obs_bound(p);
    let empirical = exceed as f64 / trials as f64;
    let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(CouplingReport {
        bound,
        empirical,
        sigma,
        trials,
        seed,
        within: empirical <= bound + 3.0 * sigma,
    })
}

/// The canonical parameter regime ε = n⁻⁸, η = n⁻², δ = ½n⁻¹⁰, N = n²¹,
/// with its exact-arithmetic consistency identities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeTable {
    pub n: usize,
    pub eps: f64,
    pub eta: f64,
    pub delta: f64,
    /// N = n²¹ rounds, kept as a big integer.
    pub rounds: BigUint,
    /// Acceptance threshold cos²(π/8)·N − ½n¹¹.
    pub threshold: f64,
    /// Failure probability e^{−n/2}.
    pub failure: f64,
    /// Expected rigidity distance (K+1)/n from the parallel constant.
    pub rigidity_bound: f64,
    /// δN = ½n¹¹ and 2N(ηε−δ)² = n/2, checked in exact rational arithmetic.
    pub identities_exact: bool,
}

pub fn regime(n: usize) -> Result<RegimeTable> {
    if n < 2 {
        return Err(Error::InvalidParams("regime needs n ≥ 2".into()));
    }
    let nf = n as f64;
    let big_n = BigUint::from(n).pow(21);

    // Exact rationals: δ = 1/(2n¹⁰), ηε = 1/n¹⁰.
    let n_int = BigInt::from(n);
    let one = BigInt::one();
    let delta_exact = BigRational::new(one.clone(), 2 * n_int.pow(10));
    let eta_eps = BigRational::new(one.clone(), n_int.pow(10));
    let n_big = big_n.to_bigint().expect("nonnegative");
    let delta_n = delta_exact.clone() * BigRational::from(n_big.clone());
    let expected_delta_n = BigRational::new(n_int.pow(11), BigInt::from(2));
    let exponent = BigRational::from(BigInt::from(2))
        * BigRational::from(n_big)
        * (eta_eps - delta_exact).pow(2);
    let expected_exponent = BigRational::new(n_int.clone(), BigInt::from(2));
    let identities_exact = delta_n == expected_delta_n && exponent == expected_exponent;

    let n_f64 = big_n.to_f64().unwrap_or(f64::INFINITY);
    Ok(RegimeTable {
        n,
        eps: nf.powi(-8),
        eta: nf.powi(-2),
        delta: 0.5 * nf.powi(-10),
        rounds: big_n,
        threshold: OPTIMAL_WIN * n_f64 - 0.5 * nf.powi(11),
        failure: (-nf / 2.0).exp(),
        rigidity_bound: (crate::rigidity::K_PARALLEL + 1.0) / nf,
        identities_exact,
    })
}

impl RegimeTable {
    pub fn csv_header() -> &'static str {
        "n,eps,eta,delta,rounds,threshold,failure,rigidity_bound,identities_exact"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{},{:e},{},{}",
            self.n,
            self.eps,
            self.eta,
            self.delta,
            self.rounds,
            self.threshold,
            self.failure,
            self.rigidity_bound,
            self.identities_exact
        )
    }
}

/// E_θ 2^{−|θ+φ|} = 2^{−n} Σ_k C(n,k) 2^{−k} as an exact rational; equals
/// (3/4)^n.
pub fn guessing_expectation_exact(n: usize) -> BigRational {
    let mut acc = BigRational::zero();
    let mut binom = BigUint::one();
    for k in 0..=n {
        if k > 0 {
            // C(n,k) = C(n,k-1)·(n-k+1)/k
            binom = binom * BigUint::from(n - k + 1) / BigUint::from(k);
        }
        acc += BigRational::new(
            binom.to_bigint().unwrap(),
            BigInt::from(2).pow((n + k) as u32),
        );
    }
    acc
}

/// Binomial-sum evaluation of the average guessing probability, asserted
/// against the closed form (3/4)^n.
pub fn guessing_expectation(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("need n ≥ 1".into()));
    }
    let exact = guessing_expectation_exact(n);
    let value = exact
        .to_f64()
        .ok_or_else(|| Error::InvalidParams("guessing expectation out of f64 range".into()))?;
    let closed = 0.75f64.powi(n as i32);
    if (value - closed).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "binomial sum {value} disagrees with (3/4)^n = {closed}"
        )));
    }
    Ok(value)
}

/// −lg Σ_b max_x p(x, b) for a finite joint distribution (rows: x, cols: b);
/// the exact conditional min-entropy of a classical-classical state.
pub fn min_entropy_classical(joint: &[Vec<f64>]) -> Result<f64> {
    if joint.is_empty() || joint[0].is_empty() {
        return Err(Error::InvalidParams("empty joint distribution".into()));
    }
    let cols = joint[0].len();
    let mut total = 0.0;
    for row in joint {
        if row.len() != cols {
            return Err(Error::InvalidParams("ragged joint distribution".into()));
        }
        for &p in row {
            if p < -TOL {
                return Err(Error::InvalidParams("negative probability".into()));
            }
            total += p;
        }
    }
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParams(format!(
            "joint distribution sums to {total}"
        )));
    }
    let mut guess = 0.0;
    for b in 0..cols {
        let best = joint.iter().map(|row| row[b]).fold(0.0, f64::max);
        guess += best;
    }
    Ok(-guess.log2())
}

/// The min-entropy rate of the string-erasure output: lg(4/3)·n.
pub fn wse_entropy_bound(n: usize) -> f64 {
    (4.0f64 / 3.0).log2() * n as f64
}

/// Pearson statistic of observed counts against the uniform distribution;
/// degrees of freedom are len − 1.
pub fn chi_square_uniform_stat(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Pearson independence statistic of a 2x2 contingency table with estimated
/// margins (one degree of freedom).
pub fn chi_square_pair_stat(c00: u64, c01: u64, c10: u64, c11: u64) -> f64 {
    let n = (c00 + c01 + c10 + c11) as f64;
    let r0 = (c00 + c01) as f64;
    let r1 = (c10 + c11) as f64;
    let k0 = (c00 + c10) as f64;
    let k1 = (c01 + c11) as f64;
    if r0 == 0.0 || r1 == 0.0 || k0 == 0.0 || k1 == 0.0 {
        return 0.0;
    }
    let det = c00 as f64 * c11 as f64 - c01 as f64 * c10 as f64;
    n * det * det / (r0 * r1 * k0 * k1)
}

/// Upper-tail critical value of the chi-square distribution: the statistic
/// exceeds this with probability `significance` under the null.
pub fn chi_square_critical(df: usize, significance: f64) -> f64 {
    use statrs::distribution::ContinuousCDF;
    let chi = statrs::distribution::ChiSquared::new(df as f64).expect("positive df");
    chi.inverse_cdf(1.0 - significance)
}
