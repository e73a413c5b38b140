//! Rigidity extraction for the TFKW game: a constructive pipeline that takes
//! a (near-)optimal strategy, dilates the players' observables into exact
//! representations, and recovers the Wiesner-Breidbart decomposition of the
//! shared state together with the theorem bound it must satisfy.
//!
//! Four extractors cover the exact and robust cases of the single game and
//! of its n-fold parallel repetition. Each returns a [`RigidityReport`] whose
//! `passed` flag asserts the one-sided bound residual ≤ bound; the empirical
//! ratio residual/√ε is logged alongside because the constants are loose
//! upper bounds, not predictions.

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::games::{
    self, ith_winning_probability_pure, marginal_element, winning_probability_pure, MoeGame,
    PureStrategy, Strategy, OPTIMAL_WIN,
};
use crate::matrix::{apply_to_factor, c64, Matrix, StateVector};
use crate::quantum;
use crate::reps;
use crate::{Error, Result, EIG_TOL, TOL};

/// Residual constant of the single-game robust theorem.
pub const K_SINGLE: f64 = 110.0;
/// Intertwining constant of the single-game robust theorem.
pub const L_SINGLE: f64 = 18.0;
/// Constant of the two-substrategy comparison lemma.
pub const Q_TWO_STRATEGY: f64 = 6300.0;
/// Intertwining constant of the parallel robust theorem.
pub const L_PARALLEL: f64 = 230_000.0;
/// Residual constant of the parallel robust theorem, valid for large n.
pub const K_PARALLEL: f64 = 320_000.0;

/// Residual tolerance for the exact extractors (everything is fp-exact, so
/// these are generous).
const EXACT_SINGLE_TOL: f64 = 1e-6;
const EXACT_PARALLEL_TOL: f64 = 1e-5;

/// The explicit residual bound of the parallel robust theorem,
/// √2·[n(Ln² + √5(2+8^¼)) + 2√n(Ln² + 2√5)]·√ε. The asymptotic form
/// K·n³·√ε only dominates this for enormous n, so desk-scale checks use the
/// explicit display.
pub fn robust_parallel_residual_bound(n: usize, eps: f64) -> f64 {
    let nf = n as f64;
    let ln2 = L_PARALLEL * nf * nf;
    let root5 = 5.0f64.sqrt();
    let c = 2.0 + 8.0f64.powf(0.25);
    std::f64::consts::SQRT_2
        * (nf * (ln2 + root5 * c) + 2.0 * nf.sqrt() * (ln2 + 2.0 * root5))
        * eps.sqrt()
}

/// One component of the Wiesner-Breidbart decomposition: the sector label
/// (per-round (s0, s1)), its weight ‖ψ_s‖², and the inner state on
/// B ⊗ C ⊗ R relative to the sector blocks of the dilated spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorComponent {
    pub sector: Vec<(u8, u8)>,
    pub weight: f64,
    pub inner_state: StateVector,
}

/// Which theorem a report was produced under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionMode {
    Exact,
    Robust,
    ExactParallel,
    RobustParallel,
}

/// Named constant used in a bound, recorded for the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundConstant {
    pub name: String,
    pub value: f64,
}

/// Everything the extraction pipeline certifies about one strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidityReport {
    pub mode: ExtractionMode,
    pub rounds: usize,
    /// Measured optimality gap max(0, 𝔴* − 𝔴) (single game) or the verified
    /// per-round bound (parallel).
    pub epsilon: f64,
    pub bob_isometry: Matrix,
    pub charlie_isometry: Matrix,
    /// Inner dimensions before dilation, for reconstructing layouts.
    pub bob_inner_dim: usize,
    pub charlie_inner_dim: usize,
    pub aux_dim: usize,
    pub components: Vec<SectorComponent>,
    /// ‖(V⊗W)|ψ⟩ − Σ_s β_s ⊗ ψ_s‖ with the decomposition normalized.
    pub residual_distance: f64,
    /// ‖(V⊗W)|ψ⟩ − v_β‖ against the unnormalized projection.
    pub unnormalized_residual: f64,
    /// Norm of the off-diagonal (mismatched-sector) part of the dilated state.
    pub offdiagonal_norm: f64,
    pub theorem_bound: f64,
    pub bound_constants: Vec<BoundConstant>,
    /// Measured max over x of ‖(V f(x) − g(x) V)|ψ⟩‖ across both players.
    pub max_intertwine_error: f64,
    pub intertwine_bound: f64,
    pub passed: bool,
    /// residual / √ε when ε is meaningfully positive.
    pub residual_over_sqrt_eps: Option<f64>,
    /// Trace-distance residual of the general-strategy corollary, when the
    /// dilated dimensions admit forming density matrices.
    pub trace_residual: Option<f64>,
}

impl RigidityReport {
    pub fn sector_count(&self) -> usize {
        1 << (2 * self.rounds)
    }

    /// Dilated factor dimensions (B', C').
    pub fn dilated_dims(&self) -> (usize, usize) {
        let s = self.sector_count();
        (s * self.bob_inner_dim, s * self.charlie_inner_dim)
    }

    /// Rebuild Σ_s β_s ⊗ ψ_s on A ⊗ B' ⊗ C' ⊗ R from the components.
    pub fn reconstructed_state(&self) -> StateVector {
        let layout = DilatedLayout {
            rounds: self.rounds,
            bob_inner: self.bob_inner_dim,
            charlie_inner: self.charlie_inner_dim,
            aux: self.aux_dim,
        };
        let mut out = StateVector::zeros(layout.total_dim());
        for comp in &self.components {
            let t = sector_index_of(&comp.sector);
            layout.add_component(&mut out, t, &comp.inner_state, 1.0);
        }
        out
    }
}

/// Layout of the dilated joint space A ⊗ (S·b) ⊗ (S·c) ⊗ R with S = 4^n
/// sector blocks on each player.
#[derive(Debug, Clone, Copy)]
pub struct DilatedLayout {
    pub rounds: usize,
    pub bob_inner: usize,
    pub charlie_inner: usize,
    pub aux: usize,
}

impl DilatedLayout {
    pub fn sector_count(&self) -> usize {
        1 << (2 * self.rounds)
    }

    pub fn alice_dim(&self) -> usize {
        1 << self.rounds
    }

    pub fn total_dim(&self) -> usize {
        self.alice_dim()
            * self.sector_count()
            * self.bob_inner
            * self.sector_count()
            * self.charlie_inner
            * self.aux
    }

    /// Six-factor dims [A, S_B, b, S_C, c, R].
    pub fn dims6(&self) -> [usize; 6] {
        [
            self.alice_dim(),
            self.sector_count(),
            self.bob_inner,
            self.sector_count(),
            self.charlie_inner,
            self.aux,
        ]
    }

    fn flat(&self, ia: usize, sb: usize, ib: usize, sc: usize, ic: usize, ir: usize) -> usize {
        let [_, s, b, _, c, r] = self.dims6();
        ((((ia * s + sb) * b + ib) * s + sc) * c + ic) * r + ir
    }

    /// The diagonal block v_{t,t} as a vector over [A, b, c, R].
    fn diagonal_block(&self, psi: &StateVector, t: usize) -> StateVector {
        let [a, _, b, _, c, r] = self.dims6();
        let mut out = StateVector::zeros(a * b * c * r);
        for ia in 0..a {
            for ib in 0..b {
                for ic in 0..c {
                    for ir in 0..r {
                        let dst = ((ia * b + ib) * c + ic) * r + ir;
                        out.set(dst, psi.get(self.flat(ia, t, ib, t, ic, ir)));
                    }
                }
            }
        }
        out
    }

    /// Add β_t ⊗ inner into the (t, t) sector block, scaled.
    fn add_component(&self, target: &mut StateVector, t: usize, inner: &StateVector, scale: f64) {
        let [a, _, b, _, c, r] = self.dims6();
        let beta = sector_alice_state(t, self.rounds);
        for ia in 0..a {
            let amp = beta.get(ia) * c64(scale, 0.0);
            if amp.norm() < 1e-300 {
                continue;
            }
            for ib in 0..b {
                for ic in 0..c {
                    for ir in 0..r {
                        let src = (ib * c + ic) * r + ir;
                        let dst = self.flat(ia, t, ib, t, ic, ir);
                        target.set(dst, target.get(dst) + amp * inner.get(src));
                    }
                }
            }
        }
    }

    /// Squared norm of the part of ψ with mismatched sector labels.
    fn offdiagonal_mass(&self, psi: &StateVector) -> f64 {
        let [a, s, b, _, c, r] = self.dims6();
        let mut acc = 0.0;
        for ia in 0..a {
            for sb in 0..s {
                for ib in 0..b {
                    for sc in 0..s {
                        if sb == sc {
                            continue;
                        }
                        for ic in 0..c {
                            for ir in 0..r {
                                acc += psi.get(self.flat(ia, sb, ib, sc, ic, ir)).norm_sqr();
                            }
                        }
                    }
                }
            }
        }
        acc
    }
}

/// Per-round (s0, s1) pairs of a sector index; generator 2i+θ carries the
/// θ-answer bit of round i.
pub fn sector_label(t: usize, rounds: usize) -> Vec<(u8, u8)> {
    (0..rounds)
        .map(|i| (((t >> (2 * i)) & 1) as u8, ((t >> (2 * i + 1)) & 1) as u8))
        .collect()
}

fn sector_index_of(label: &[(u8, u8)]) -> usize {
    label
        .iter()
        .enumerate()
        .fold(0usize, |acc, (i, &(s0, s1))| {
            acc | ((s0 as usize) << (2 * i)) | ((s1 as usize) << (2 * i + 1))
        })
}

/// X^{s0}Z^{s1}|β⟩ tensored over the rounds of a sector.
pub fn sector_alice_state(t: usize, rounds: usize) -> StateVector {
    quantum::wb_state_multi(&sector_label(t, rounds))
}

/// Outcome of projecting a dilated state onto the nearest normalized
/// Wiesner-Breidbart decomposition.
#[derive(Debug, Clone)]
pub struct BreidbartDecomposition {
    pub components: Vec<SectorComponent>,
    /// ‖ψ − φ‖ with φ the normalized decomposition.
    pub residual: f64,
    /// ‖ψ − v_β‖ against the raw projection.
    pub unnormalized_residual: f64,
    pub offdiagonal_norm: f64,
    pub vbeta_norm: f64,
}

/// Project the dilated state onto its diagonal sectors, then each sector
/// onto its Wiesner-Breidbart line on Alice, normalize, and report the
/// distance. A zero-norm projection signals a totally non-optimal state:
/// residual √2 and no components.
pub fn nearest_breidbart_decomposition(
    psi_dilated: &StateVector,
    layout: &DilatedLayout,
) -> Result<BreidbartDecomposition> {
    if psi_dilated.dim() != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "dilated state dim {} vs layout {}",
            psi_dilated.dim(),
            layout.total_dim()
        )));
    }
    let [a, _, b, _, c, r] = layout.dims6();
    let abc_dims = [a, b, c, r];
    let offdiagonal_norm = layout.offdiagonal_mass(psi_dilated).sqrt();

    let mut raw_components: Vec<(usize, StateVector)> = Vec::new();
    let mut vbeta_sq = 0.0;
    for t in 0..layout.sector_count() {
        let block = layout.diagonal_block(psi_dilated, t);
        let beta = sector_alice_state(t, layout.rounds);
        let bra = Matrix::from_fn(1, a, |_, j| beta.get(j).conj());
        let inner = apply_to_factor(&bra, &block, &abc_dims, 0);
        let w = inner.norm().powi(2);
        vbeta_sq += w;
        if w > 1e-30 {
            raw_components.push((t, inner));
        }
    }
    let vbeta_norm = vbeta_sq.sqrt();

    if vbeta_norm <= 1e-12 {
        return Ok(BreidbartDecomposition {
            components: Vec::new(),
            residual: std::f64::consts::SQRT_2,
            unnormalized_residual: 1.0,
            offdiagonal_norm,
            vbeta_norm,
        });
    }

    // ⟨ψ|v_β⟩ = ‖v_β‖² since v_β is an orthogonal projection of ψ, so both
    // distances have closed forms; compute the normalized one directly too.
    let psi_norm_sq = psi_dilated.norm().powi(2);
    let unnormalized_residual = (psi_norm_sq - vbeta_sq).max(0.0).sqrt();
    let mut phi = StateVector::zeros(layout.total_dim());
    let mut components = Vec::new();
    for (t, inner) in raw_components {
        let scaled = inner.scale(c64(1.0 / vbeta_norm, 0.0));
        layout.add_component(&mut phi, t, &scaled, 1.0);
        components.push(SectorComponent {
            sector: sector_label(t, layout.rounds),
            weight: scaled.norm().powi(2),
            inner_state: scaled,
        });
    }
    let residual = psi_dilated.sub(&phi).norm();
    components.sort_by_key(|comp| sector_index_of(&comp.sector));
    Ok(BreidbartDecomposition {
        components,
        residual,
        unnormalized_residual,
        offdiagonal_norm,
        vbeta_norm,
    })
}

fn require_tfkw_single(game: &MoeGame) -> Result<()> {
    if game.rounds() != 1 || game.question_count() != 2 || game.alice_dim() != 2 {
        return Err(Error::Precondition(
            "extraction requires the single-round TFKW game".into(),
        ));
    }
    Ok(())
}

fn require_tfkw_parallel(game: &MoeGame) -> Result<usize> {
    if game.base_question_count() != 2
        || game.base_alice_dim() != 2
        || game.base_answer_count() != 2
    {
        return Err(Error::Precondition(
            "extraction requires a parallel repetition of the TFKW game".into(),
        ));
    }
    let n = game.rounds();
    if n > 3 {
        return Err(Error::DimensionCap(1 << (2 * n), 64));
    }
    Ok(n)
}

/// Shared tail of all extractors: dilate both players with the given group
/// functions, decompose, and assemble the report.
#[allow(clippy::too_many_arguments)]
fn finish_extraction(
    game: &MoeGame,
    s: &PureStrategy,
    mode: ExtractionMode,
    epsilon: f64,
    bob_f: &reps::GroupFunction,
    charlie_f: &reps::GroupFunction,
    theorem_bound: f64,
    intertwine_bound: f64,
    bound_constants: Vec<BoundConstant>,
) -> Result<RigidityReport> {
    let dims = s.dims(game);
    let [a, b, c, r] = dims;

    // Bob-first and Charlie-first orderings for the dilation guarantee.
    let psi_b_first = s.state.permute(&dims, &[1, 0, 2, 3]);
    let psi_c_first = s.state.permute(&dims, &[2, 0, 1, 3]);
    let dil_b = reps::gowers_hatami_dilate(bob_f, &psi_b_first)?;
    let dil_c = reps::gowers_hatami_dilate(charlie_f, &psi_c_first)?;

    let psi_mid = apply_to_factor(&dil_b.isometry, &s.state, &dims, 1);
    let mid_dims = [a, dil_b.dilated_dim(), c, r];
    let psi_dilated = apply_to_factor(&dil_c.isometry, &psi_mid, &mid_dims, 2);

    let rounds = game.rounds();
    let layout = DilatedLayout {
        rounds,
        bob_inner: b,
        charlie_inner: c,
        aux: r,
    };
    let decomposition = nearest_breidbart_decomposition(&psi_dilated, &layout)?;

    let max_intertwine_error = dil_b.max_intertwine_error.max(dil_c.max_intertwine_error);
    let passed = decomposition.residual <= theorem_bound + EIG_TOL
        && max_intertwine_error <= intertwine_bound + EIG_TOL;
    let residual_over_sqrt_eps = if epsilon > 1e-15 {
        Some(decomposition.residual / epsilon.sqrt())
    } else {
        None
    };

    Ok(RigidityReport {
        mode,
        rounds,
        epsilon,
        bob_isometry: dil_b.isometry,
        charlie_isometry: dil_c.isometry,
        bob_inner_dim: b,
        charlie_inner_dim: c,
        aux_dim: r,
        components: decomposition.components,
        residual_distance: decomposition.residual,
        unnormalized_residual: decomposition.unnormalized_residual,
        offdiagonal_norm: decomposition.offdiagonal_norm,
        theorem_bound,
        bound_constants,
        max_intertwine_error,
        intertwine_bound,
        passed,
        residual_over_sqrt_eps,
        trace_residual: None,
    })
}

fn single_game_extraction(
    game: &MoeGame,
    s: &PureStrategy,
    mode: ExtractionMode,
) -> Result<RigidityReport> {
    require_tfkw_single(game)?;
    s.validate(game)?;
    let w = winning_probability_pure(game, s)?;
    let epsilon = (OPTIMAL_WIN - w).max(0.0);
    if mode == ExtractionMode::Exact && epsilon > TOL {
        return Err(Error::Precondition(format!(
            "strategy wins {w}, short of optimal by {epsilon:.3e}; use the robust extractor"
        )));
    }

    let dims = s.dims(game);
    let b0 = s.bob_observable(0)?;
    let b1 = s.bob_observable(1)?;
    let c0 = s.charlie_observable(0)?;
    let c1 = s.charlie_observable(1)?;

    let psi_b_first = s.state.permute(&dims, &[1, 0, 2, 3]);
    let psi_c_first = s.state.permute(&dims, &[2, 0, 1, 3]);
    let bob_rep = reps::z22_from_commutator(&b0, &b1, &psi_b_first)?;
    let charlie_rep = reps::z22_from_commutator(&c0, &c1, &psi_c_first)?;

    let (theorem_bound, intertwine_bound, constants) = match mode {
        ExtractionMode::Exact => (
            EXACT_SINGLE_TOL,
            EXACT_SINGLE_TOL,
            vec![BoundConstant {
                name: "exact_tolerance".into(),
                value: EXACT_SINGLE_TOL,
            }],
        ),
        _ => (
            K_SINGLE * epsilon.sqrt(),
            L_SINGLE * epsilon.sqrt(),
            vec![
                BoundConstant {
                    name: "K_single".into(),
                    value: K_SINGLE,
                },
                BoundConstant {
                    name: "L_single".into(),
                    value: L_SINGLE,
                },
            ],
        ),
    };

    finish_extraction(
        game,
        s,
        mode,
        epsilon,
        &bob_rep.f,
        &charlie_rep.f,
        theorem_bound,
        intertwine_bound,
        constants,
    )
}

/// Exact rigidity: requires an optimal strategy, returns its decomposition
/// into Wiesner-Breidbart components with a tolerance-scale residual.
pub fn extract_exact(game: &MoeGame, s: &PureStrategy) -> Result<RigidityReport> {
    single_game_extraction(game, s, ExtractionMode::Exact)
}

/// Robust rigidity: measures ε from the winning probability and asserts the
/// K√ε / L√ε bounds.
pub fn extract_robust(game: &MoeGame, s: &PureStrategy) -> Result<RigidityReport> {
    single_game_extraction(game, s, ExtractionMode::Robust)
}

/// General-strategy corollary: purify, extract, and report the
/// trace-distance residual after discarding the auxiliary register
/// (when the dilated dimensions admit density matrices).
pub fn extract_robust_general(game: &MoeGame, s: &Strategy) -> Result<RigidityReport> {
    let pure = games::purify_strategy(game, s)?;
    let mut report = extract_robust(game, &pure)?;

    let (bdil, cdil) = report.dilated_dims();
    let abc = game.alice_dim() * bdil * cdil;
    if abc <= 512 {
        let dims = pure.dims(game);
        let psi_mid = apply_to_factor(&report.bob_isometry, &pure.state, &dims, 1);
        let mid_dims = [dims[0], bdil, dims[2], dims[3]];
        let psi_dil = apply_to_factor(&report.charlie_isometry, &psi_mid, &mid_dims, 2);
        let full_dims = [dims[0], bdil, cdil, dims[3]];
        let rho = crate::matrix::reduced_density_matrix(&psi_dil, &full_dims, &[0, 1, 2])?;
        let phi = report.reconstructed_state();
        let sigma = crate::matrix::reduced_density_matrix(&phi, &full_dims, &[0, 1, 2])?;
        // The decomposition can be subnormalized only through fp noise, but
        // trace_distance validates inputs, so renormalize defensively.
        let sigma = sigma.scale(c64(1.0 / sigma.trace().re.max(1e-12), 0.0));
        report.trace_residual = Some(crate::matrix::trace_distance(&rho, &sigma)?);
    }
    Ok(report)
}

/// The sub-strategy of a parallel-game strategy at round `i` with question
/// prefix `phi` (which must have φ_i = 0): Alice measures qubit i, Bob and
/// Charlie marginalize their answers to round i with the other questions
/// pinned to φ.
pub fn sub_strategy(
    game: &MoeGame,
    s: &PureStrategy,
    phi: &[u8],
    i: usize,
) -> Result<(MoeGame, PureStrategy)> {
    let n = game.rounds();
    if phi.len() != n || i >= n {
        return Err(Error::IndexOutOfRange(format!(
            "prefix length {} round {i} for an {n}-round game",
            phi.len()
        )));
    }
    if phi[i] != 0 {
        return Err(Error::Precondition(format!(
            "prefix must have a zero at the target round, got {}",
            bits::to_string(phi)
        )));
    }
    s.validate(game)?;
    let embedded = games::tfkw_embedded(n, i)?;
    let meas_for = |family: &[quantum::Pvm]| -> Result<Vec<quantum::Pvm>> {
        (0..2u8)
            .map(|theta| {
                let mut q = phi.to_vec();
                q[i] = theta;
                let q_idx = bits::to_index(&q);
                let elems: Vec<Matrix> = (0..2)
                    .map(|y| marginal_element(family[q_idx].as_povm().elements(), n, i, y))
                    .collect();
                quantum::Pvm::new(elems)
            })
            .collect()
    };
    let sub = PureStrategy {
        bob_dim: s.bob_dim,
        charlie_dim: s.charlie_dim,
        aux_dim: s.aux_dim,
        bob_meas: meas_for(&s.bob_meas)?,
        charlie_meas: meas_for(&s.charlie_meas)?,
        state: s.state.clone(),
    };
    Ok((embedded, sub))
}

/// Per-round table of (φ bits, ε_{φ,i}) entries.
pub type EpsilonTable = Vec<Vec<(Vec<u8>, f64)>>;

/// ε_{φ,i} = max(0, 𝔴* − 𝔴(^{φ,i}S)) for every round i and admissible φ.
pub fn substrategy_epsilons(game: &MoeGame, s: &PureStrategy) -> Result<EpsilonTable> {
    let n = game.rounds();
    let mut table = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::new();
        for mask in 0..(1usize << n) {
            let phi = bits::from_index(mask, n);
            if phi[i] != 0 {
                continue;
            }
            let (sub_game, sub) = sub_strategy(game, s, &phi, i)?;
            let w = winning_probability_pure(&sub_game, &sub)?;
            row.push((phi, (OPTIMAL_WIN - w).max(0.0)));
        }
        table.push(row);
    }
    Ok(table)
}

/// Good sets G_i = {φ : φ_i = 0, ε_{φ,i} ≤ 5ε} and the size guarantee
/// |G_i| > 2^{n−2} + 2^{n−3} (the strict integer form of the counting
/// argument, equal to ≥ 2^{n−2}+2^{n−3}+1 whenever that threshold is an
/// integer).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoodSetReport {
    pub rounds: usize,
    pub eps: f64,
    /// Per round: (φ label, ε_{φ,i}) for every admissible φ.
    pub eps_phi: Vec<Vec<(String, f64)>>,
    pub good_sets: Vec<Vec<String>>,
    /// Lexicographically smallest member per round.
    pub chosen_phi: Vec<String>,
    /// Strict lower threshold 2^{n−2} + 2^{n−3} on |G_i|.
    pub size_threshold: f64,
    pub sizes_ok: bool,
}

pub fn good_sets(game: &MoeGame, s: &PureStrategy, eps: f64) -> Result<GoodSetReport> {
    let n = require_tfkw_parallel(game)?;
    let table = substrategy_epsilons(game, s)?;
    let mut eps_phi = Vec::with_capacity(n);
    let mut sets = Vec::with_capacity(n);
    let mut chosen = Vec::with_capacity(n);
    let mut sizes_ok = true;
    // |G_i| > 3·2^{n-3} ⟺ 8·|G_i| > 3·2^n, kept in integers.
    let size_threshold = 3.0 * 2f64.powi(n as i32 - 3);
    for row in &table {
        let mut labeled = Vec::new();
        let mut good = Vec::new();
        for (phi, e) in row {
            labeled.push((bits::to_string(phi), *e));
            if *e <= 5.0 * eps + 1e-12 {
                good.push(bits::to_string(phi));
            }
        }
        good.sort();
        if 8 * good.len() <= 3 * (1usize << n) {
            sizes_ok = false;
        }
        chosen.push(good.first().cloned().unwrap_or_default());
        eps_phi.push(labeled);
        sets.push(good);
    }
    Ok(GoodSetReport {
        rounds: n,
        eps,
        eps_phi,
        good_sets: sets,
        chosen_phi: chosen,
        size_threshold,
        sizes_ok,
    })
}

/// Marginal observables ^{φ,i}B_θ for both players at the chosen prefixes.
fn round_observables(
    game: &MoeGame,
    s: &PureStrategy,
    chosen_phi: &[Vec<u8>],
) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
    let n = game.rounds();
    let mut us = Vec::with_capacity(2 * n);
    let mut vs = Vec::with_capacity(2 * n);
    for i in 0..n {
        for theta in 0..2u8 {
            let mut q = chosen_phi[i].clone();
            q[i] = theta;
            let q_idx = bits::to_index(&q);
            let b = marginal_element(s.bob_meas[q_idx].as_povm().elements(), n, i, 0).sub(
                &marginal_element(s.bob_meas[q_idx].as_povm().elements(), n, i, 1),
            );
            let c = marginal_element(s.charlie_meas[q_idx].as_povm().elements(), n, i, 0).sub(
                &marginal_element(s.charlie_meas[q_idx].as_povm().elements(), n, i, 1),
            );
            us.push(b);
            vs.push(c);
        }
    }
    Ok((us, vs))
}

#[allow(clippy::too_many_arguments)]
fn parallel_extraction(
    game: &MoeGame,
    s: &PureStrategy,
    chosen_phi: Vec<Vec<u8>>,
    mode: ExtractionMode,
    epsilon: f64,
    theorem_bound: f64,
    intertwine_bound: f64,
    constants: Vec<BoundConstant>,
) -> Result<RigidityReport> {
    let dims = s.dims(game);
    let (us, vs) = round_observables(game, s, &chosen_phi)?;

    // Bob's family with Charlie's as swap partners, and vice versa.
    let psi_bc = s.state.permute(&dims, &[1, 2, 0, 3]);
    let bc_dims = [dims[1], dims[2], dims[0], dims[3]];
    let bob_rep = reps::z2n_family(&us, &vs, &psi_bc, &bc_dims)?;

    let psi_cb = s.state.permute(&dims, &[2, 1, 0, 3]);
    let cb_dims = [dims[2], dims[1], dims[0], dims[3]];
    let charlie_rep = reps::z2n_family(&vs, &us, &psi_cb, &cb_dims)?;

    finish_extraction(
        game,
        s,
        mode,
        epsilon,
        &bob_rep.f,
        &charlie_rep.f,
        theorem_bound,
        intertwine_bound,
        constants,
    )
}

/// Exact parallel rigidity: every per-round winning probability must be
/// optimal; the prefix φ = 0 is used for every round.
pub fn extract_exact_parallel(game: &MoeGame, s: &PureStrategy) -> Result<RigidityReport> {
    let n = require_tfkw_parallel(game)?;
    s.validate(game)?;
    for i in 0..n {
        let wi = ith_winning_probability_pure(game, s, i)?;
        if (OPTIMAL_WIN - wi).abs() > TOL {
            return Err(Error::Precondition(format!(
                "round {i} wins {wi}, not optimal; use the robust parallel extractor"
            )));
        }
    }
    let chosen = vec![vec![0u8; n]; n];
    parallel_extraction(
        game,
        s,
        chosen,
        ExtractionMode::ExactParallel,
        0.0,
        EXACT_PARALLEL_TOL,
        EXACT_PARALLEL_TOL,
        vec![BoundConstant {
            name: "exact_tolerance".into(),
            value: EXACT_PARALLEL_TOL,
        }],
    )
}

/// Robust parallel rigidity: verifies the claimed per-round bound ε, forms
/// the good sets, picks the lexicographically smallest prefix per round, and
/// asserts the explicit residual bound of the theorem.
pub fn extract_robust_parallel(
    game: &MoeGame,
    s: &PureStrategy,
    eps: f64,
) -> Result<(GoodSetReport, RigidityReport)> {
    let n = require_tfkw_parallel(game)?;
    s.validate(game)?;
    for i in 0..n {
        let wi = ith_winning_probability_pure(game, s, i)?;
        if wi < OPTIMAL_WIN - eps - TOL {
            return Err(Error::Precondition(format!(
                "round {i} wins {wi}, below the claimed 𝔴* − {eps}"
            )));
        }
    }
    let good = good_sets(game, s, eps)?;
    if !good.sizes_ok {
        let (round, size) = good
            .good_sets
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.len()))
            .min_by_key(|&(_, l)| l)
            .unwrap();
        return Err(Error::GoodSetViolation {
            round,
            size,
            needed: good.size_threshold,
        });
    }
    let chosen: Vec<Vec<u8>> = good
        .chosen_phi
        .iter()
        .map(|s| bits::from_string(s).expect("labels are bitstrings"))
        .collect();

    let nf = n as f64;
    let theorem_bound = robust_parallel_residual_bound(n, eps);
    let intertwine_bound = L_PARALLEL * nf * nf * eps.sqrt();
    let constants = vec![
        BoundConstant {
            name: "L_parallel".into(),
            value: L_PARALLEL,
        },
        BoundConstant {
            name: "K_parallel_asymptotic".into(),
            value: K_PARALLEL,
        },
        BoundConstant {
            name: "Q_two_strategy".into(),
            value: Q_TWO_STRATEGY,
        },
    ];
    let report = parallel_extraction(
        game,
        s,
        chosen,
        ExtractionMode::RobustParallel,
        eps,
        theorem_bound,
        intertwine_bound,
        constants,
    )?;
    Ok((good, report))
}

/// How differently two admissible prefixes act on the state:
/// max_θ ‖(^{φ,i}B_θ − ^{φ',i}B_θ)|ψ⟩‖, with the comparison-lemma bound
/// Q·√(5·max(ε_{φ,i}, ε_{φ',i})).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstrategyComparison {
    pub max_difference: f64,
    pub eps_phi: f64,
    pub eps_phi_prime: f64,
    pub bound: f64,
    pub passed: bool,
}

pub fn compare_substrategies(
    game: &MoeGame,
    s: &PureStrategy,
    i: usize,
    phi: &[u8],
    phi_prime: &[u8],
) -> Result<SubstrategyComparison> {
    let n = game.rounds();
    s.validate(game)?;
    let dims = s.dims(game);
    let mut max_difference = 0.0f64;
    for theta in 0..2u8 {
        let mut q1 = phi.to_vec();
        q1[i] = theta;
        let mut q2 = phi_prime.to_vec();
        q2[i] = theta;
        let obs = |q: &[u8]| -> Matrix {
            let q_idx = bits::to_index(q);
            marginal_element(s.bob_meas[q_idx].as_povm().elements(), n, i, 0).sub(
                &marginal_element(s.bob_meas[q_idx].as_povm().elements(), n, i, 1),
            )
        };
        let diff = obs(&q1).sub(&obs(&q2));
        max_difference = max_difference.max(apply_to_factor(&diff, &s.state, &dims, 1).norm());
    }

    let eps_of = |p: &[u8]| -> Result<f64> {
        let (g, sub) = sub_strategy(game, s, p, i)?;
        Ok((OPTIMAL_WIN - winning_probability_pure(&g, &sub)?).max(0.0))
    };
    let eps_phi = eps_of(phi)?;
    let eps_phi_prime = eps_of(phi_prime)?;
    let delta = eps_phi.max(eps_phi_prime);
    let bound = Q_TWO_STRATEGY * (5.0 * delta).sqrt();
    Ok(SubstrategyComparison {
        max_difference,
        eps_phi,
        eps_phi_prime,
        bound,
        passed: max_difference <= bound + EIG_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{canonical_pure, make_tfkw, parallel_repeat, product_pure_strategies};
    use crate::matrix::sample;
    use crate::quantum::{wb_state, Povm};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    /// Alice-state perturbation of the canonical strategy: cos δ·|β⟩ +
    /// sin δ·XZ|β⟩ with the always-answer-0 rule kept.
    fn perturbed_canonical(delta: f64) -> PureStrategy {
        let mut s = canonical_pure(0, 0);
        let beta = wb_state(0, 0);
        let orth = {
            let z = crate::quantum::pauli(crate::quantum::Pauli::Z).apply(&beta);
            crate::quantum::pauli(crate::quantum::Pauli::X).apply(&z)
        };
        s.state = beta
            .scale(c64(delta.cos(), 0.0))
            .add(&orth.scale(c64(delta.sin(), 0.0)));
        s
    }

    #[test]
    fn exact_extraction_on_canonical_strategies() {
        let g = make_tfkw();
        for (s0, s1) in [(0u8, 0u8), (1, 0), (0, 1), (1, 1)] {
            let s = canonical_pure(s0, s1);
            let report = extract_exact(&g, &s).unwrap();
            assert!(
                report.residual_distance <= 1e-7,
                "residual {}",
                report.residual_distance
            );
            assert_eq!(report.components.len(), 1);
            assert_eq!(report.components[0].sector, vec![(s0, s1)]);
            assert_close(report.components[0].weight, 1.0, 1e-9);
            assert!(report.passed);
            assert!(report.bob_isometry.is_isometry(1e-9));
            assert!(report.charlie_isometry.is_isometry(1e-9));
        }
    }

    #[test]
    fn exact_extraction_on_four_way_mixture() {
        let g = make_tfkw();
        let mix = games::canonical_mixture();
        let pure = games::purify_strategy(&g, &mix).unwrap();
        let report = extract_exact(&g, &pure).unwrap();
        assert!(report.residual_distance <= 1e-6);
        assert_eq!(report.components.len(), 4);
        for comp in &report.components {
            assert_close(comp.weight, 0.25, 1e-6);
        }
        let total: f64 = report.components.iter().map(|c| c.weight).sum();
        assert_close(total, 1.0, 1e-9);
    }

    #[test]
    fn component_supports_are_orthogonal_sectors() {
        // Components live in distinct sector blocks on both dilated factors,
        // so their overlaps vanish structurally; verify via full embedding.
        let g = make_tfkw();
        let mix = games::canonical_mixture();
        let pure = games::purify_strategy(&g, &mix).unwrap();
        let report = extract_exact(&g, &pure).unwrap();
        let layout = DilatedLayout {
            rounds: 1,
            bob_inner: report.bob_inner_dim,
            charlie_inner: report.charlie_inner_dim,
            aux: report.aux_dim,
        };
        let full: Vec<StateVector> = report
            .components
            .iter()
            .map(|comp| {
                let mut v = StateVector::zeros(layout.total_dim());
                layout.add_component(
                    &mut v,
                    super::sector_index_of(&comp.sector),
                    &comp.inner_state,
                    1.0,
                );
                v
            })
            .collect();
        for (i, a) in full.iter().enumerate() {
            for b in full.iter().skip(i + 1) {
                assert!(a.inner(b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_extraction_round_trip_reproduces_optimal_value() {
        // Rebuild a strategy from the report's decomposition with the
        // dilated observables and check it wins optimally.
        let g = make_tfkw();
        let mix = games::canonical_mixture();
        let pure = games::purify_strategy(&g, &mix).unwrap();
        let report = extract_exact(&g, &pure).unwrap();
        let phi = report.reconstructed_state().normalized();
        let (bdil, cdil) = report.dilated_dims();

        let meas = |inner: usize| -> Vec<crate::quantum::Pvm> {
            (0..2usize)
                .map(|theta| {
                    let elems: Vec<Matrix> = (0..2usize)
                        .map(|y| {
                            let mut e = Matrix::zeros(4 * inner, 4 * inner);
                            for sector in 0..4usize {
                                let s_theta = (sector >> theta) & 1;
                                if s_theta == y {
                                    for j in 0..inner {
                                        e[(sector * inner + j, sector * inner + j)] =
                                            num_complex::Complex64::ONE;
                                    }
                                }
                            }
                            e
                        })
                        .collect();
                    crate::quantum::Pvm::new(elems).unwrap()
                })
                .collect()
        };
        let rebuilt = PureStrategy {
            bob_dim: bdil,
            charlie_dim: cdil,
            aux_dim: report.aux_dim,
            bob_meas: meas(report.bob_inner_dim),
            charlie_meas: meas(report.charlie_inner_dim),
            state: phi,
        };
        let w = winning_probability_pure(&g, &rebuilt).unwrap();
        assert_close(w, OPTIMAL_WIN, 1e-9);
    }

    #[test]
    fn exact_extraction_rejects_suboptimal_strategies() {
        let g = make_tfkw();
        let s = perturbed_canonical(0.3);
        assert!(matches!(extract_exact(&g, &s), Err(Error::Precondition(_))));
    }

    #[test]
    fn robust_extraction_reduces_to_exact_at_zero_perturbation() {
        let g = make_tfkw();
        let report = extract_robust(&g, &canonical_pure(0, 0)).unwrap();
        assert!(report.residual_distance <= 1e-6);
        assert!(report.passed);
    }

    #[test]
    fn robust_bound_holds_along_the_perturbation_sweep() {
        let g = make_tfkw();
        let mut last_eps = -1.0f64;
        for k in 1..=20 {
            let delta = 0.01 * k as f64;
            let s = perturbed_canonical(delta);
            let report = extract_robust(&g, &s).unwrap();
            assert!(report.epsilon > 0.0);
            // Monotone in the sweep.
            assert!(report.epsilon >= last_eps - 1e-12);
            last_eps = report.epsilon;
            assert!(
                report.residual_distance <= K_SINGLE * report.epsilon.sqrt(),
                "delta={delta}: residual {} vs bound {}",
                report.residual_distance,
                K_SINGLE * report.epsilon.sqrt()
            );
            assert!(report.max_intertwine_error <= L_SINGLE * report.epsilon.sqrt() + 1e-9);
            let ratio = report.residual_over_sqrt_eps.unwrap();
            assert!(ratio.is_finite() && ratio < K_SINGLE);
            assert!(report.passed);
        }
    }

    #[test]
    fn robust_extraction_of_bob_entangled_charlie_random() {
        // Bob guesses perfectly through a maximally entangled pair; Charlie
        // flips coins. 𝔴 = ½, ε = 𝔴* − ½, and the bound holds trivially.
        let g = make_tfkw();
        let s_ab = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_real(&[s_ab, 0.0, 0.0, s_ab]);
        let half = Matrix::identity(1).scale(c64(0.5, 0.0));
        let coin = Povm::new(vec![half.clone(), half]).unwrap();
        let strategy = Strategy {
            bob_dim: 2,
            charlie_dim: 1,
            bob_meas: vec![
                crate::quantum::conjugate_basis(0).as_povm().clone(),
                crate::quantum::conjugate_basis(1).as_povm().clone(),
            ],
            charlie_meas: vec![coin.clone(), coin],
            state: bell.projector(),
        };
        let w = games::winning_probability(&g, &strategy).unwrap();
        assert_close(w, 0.5, 1e-12);
        let report = extract_robust_general(&g, &strategy).unwrap();
        assert_close(report.epsilon, OPTIMAL_WIN - 0.5, 1e-9);
        assert!(report.passed);
        assert!(report.residual_distance <= K_SINGLE * report.epsilon.sqrt());
        // Trace-distance residual from the corollary is also bounded.
        let tr = report.trace_residual.unwrap();
        assert!(tr <= report.residual_distance + 1e-6);
    }

    #[test]
    fn padding_with_unused_ancilla_leaves_residual_unchanged() {
        let g = make_tfkw();
        let base = perturbed_canonical(0.07);
        let report = extract_robust(&g, &base).unwrap();

        // Pad Bob with a qubit ancilla in |0⟩ that no measurement touches.
        let padded = PureStrategy {
            bob_dim: base.bob_dim * 2,
            charlie_dim: base.charlie_dim,
            aux_dim: base.aux_dim,
            bob_meas: base
                .bob_meas
                .iter()
                .map(|m| {
                    crate::quantum::Pvm::new(
                        m.as_povm()
                            .elements()
                            .iter()
                            .map(|e| e.tensor(&Matrix::identity(2)))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect(),
            charlie_meas: base.charlie_meas.clone(),
            state: {
                let dims = base.dims(&g);
                let with_anc = base.state.tensor(&StateVector::basis_state(2, 0));
                // [A,B,C,R,anc] → [A,(B,anc),C,R]
                with_anc.permute(&[dims[0], dims[1], dims[2], dims[3], 2], &[0, 1, 4, 2, 3])
            },
        };
        let padded_report = extract_robust(&g, &padded).unwrap();
        assert_close(
            report.residual_distance,
            padded_report.residual_distance,
            1e-9,
        );
    }

    #[test]
    fn nearest_breidbart_on_prepared_forms() {
        let layout = DilatedLayout {
            rounds: 1,
            bob_inner: 1,
            charlie_inner: 1,
            aux: 1,
        };
        // Already in Breidbart form: β_{01} in sector 01 ⇒ zero residual.
        let mut psi = StateVector::zeros(layout.total_dim());
        layout.add_component(&mut psi, 0b10, &StateVector::basis_state(1, 0), 1.0);
        let dec = nearest_breidbart_decomposition(&psi, &layout).unwrap();
        assert!(dec.residual < 1e-12);
        assert_eq!(dec.components.len(), 1);
        assert_eq!(dec.components[0].sector, vec![(0, 1)]);

        // |0⟩ in sector 00: unnormalized residual sin(π/8), normalized
        // residual √(2 − 2cos(π/8)).
        let mut psi = StateVector::zeros(layout.total_dim());
        for ia in 0..2 {
            let amp = StateVector::basis_state(2, 0).get(ia);
            psi.set(layout.flat(ia, 0, 0, 0, 0, 0), amp);
        }
        let dec = nearest_breidbart_decomposition(&psi, &layout).unwrap();
        let c8 = std::f64::consts::FRAC_PI_8.cos();
        assert_close(
            dec.unnormalized_residual,
            std::f64::consts::FRAC_PI_8.sin(),
            1e-12,
        );
        assert_close(dec.residual, (2.0 - 2.0 * c8).sqrt(), 1e-12);

        // Orthogonal to every β_s ⊗ sector-s: the degenerate branch.
        let mut psi = StateVector::zeros(layout.total_dim());
        let xzbeta = {
            let z = crate::quantum::pauli(crate::quantum::Pauli::Z).apply(&wb_state(0, 0));
            crate::quantum::pauli(crate::quantum::Pauli::X).apply(&z)
        };
        for ia in 0..2 {
            psi.set(layout.flat(ia, 0, 0, 0, 0, 0), xzbeta.get(ia));
        }
        let dec = nearest_breidbart_decomposition(&psi, &layout).unwrap();
        assert!(dec.components.is_empty());
        assert_close(dec.residual, std::f64::consts::SQRT_2, 1e-12);
    }

    #[test]
    fn sub_strategy_extraction_and_averaging_identity() {
        let g = make_tfkw();
        let g2 = parallel_repeat(&g, 2).unwrap();

        // Product of canonical strategies: every sub-strategy is optimal.
        let prod =
            product_pure_strategies(&g, &[canonical_pure(0, 0), canonical_pure(1, 1)]).unwrap();
        for i in 0..2 {
            for mask in 0..4usize {
                let phi = bits::from_index(mask, 2);
                if phi[i] != 0 {
                    continue;
                }
                let (sub_game, sub) = sub_strategy(&g2, &prod, &phi, i).unwrap();
                let w = winning_probability_pure(&sub_game, &sub).unwrap();
                assert_close(w, OPTIMAL_WIN, 1e-9);
            }
        }

        // n = 1, φ = 0: the original strategy back.
        let s1 = canonical_pure(0, 0);
        let (sub_game, sub) = sub_strategy(&g, &s1, &[0], 0).unwrap();
        assert_close(
            winning_probability_pure(&sub_game, &sub).unwrap(),
            OPTIMAL_WIN,
            1e-12,
        );

        // Averaging identity on random strategies:
        // E_{φ : φ_i = 0} 𝔴(^{φ,i}S) = 𝔴^i.
        let mut rng = sample::rng(31);
        for _ in 0..3 {
            let s = games::sampler::random_pure_strategy(&g2, 2, 2, &mut rng);
            for i in 0..2 {
                let mut acc = 0.0;
                let mut count = 0;
                for mask in 0..4usize {
                    let phi = bits::from_index(mask, 2);
                    if phi[i] != 0 {
                        continue;
                    }
                    let (sub_game, sub) = sub_strategy(&g2, &s, &phi, i).unwrap();
                    acc += winning_probability_pure(&sub_game, &sub).unwrap();
                    count += 1;
                }
                let avg = acc / count as f64;
                let wi = ith_winning_probability_pure(&g2, &s, i).unwrap();
                assert_close(avg, wi, 1e-9);
            }
        }

        // φ_i ≠ 0 is rejected.
        assert!(sub_strategy(&g2, &prod, &[1, 0], 0).is_err());
    }

    #[test]
    fn exact_parallel_extraction_of_product_strategies() {
        let g = make_tfkw();
        let g2 = parallel_repeat(&g, 2).unwrap();
        let prod =
            product_pure_strategies(&g, &[canonical_pure(0, 0), canonical_pure(1, 1)]).unwrap();
        let report = extract_exact_parallel(&g2, &prod).unwrap();
        assert!(report.residual_distance <= 1e-6);
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].sector, vec![(0, 0), (1, 1)]);
        assert!(report.passed);
    }

    #[test]
    fn exact_parallel_agrees_with_single_round_at_n_one() {
        let g = make_tfkw();
        let s = canonical_pure(1, 0);
        let single = extract_exact(&g, &s).unwrap();
        let parallel = extract_exact_parallel(&g, &s).unwrap();
        assert_eq!(single.components.len(), parallel.components.len());
        assert_eq!(single.components[0].sector, parallel.components[0].sector);
        assert_close(single.residual_distance, parallel.residual_distance, 1e-9);
    }

    #[test]
    fn exact_parallel_two_component_mixture() {
        // Mixture over t ∈ {(00,00), (10,01)} with orthogonal flags on both
        // players.
        let g = make_tfkw();
        let g2 = parallel_repeat(&g, 2).unwrap();
        let sectors = [vec![(0u8, 0u8), (0, 0)], vec![(1, 0), (0, 1)]];
        let mut state = StateVector::zeros(4 * 2 * 2);
        // Factor layout [A(4), B(2), C(2)]: flag k on both B and C.
        for (k, sector) in sectors.iter().enumerate() {
            let alice = quantum::wb_state_multi(sector);
            for ia in 0..4 {
                let idx = (ia * 2 + k) * 2 + k;
                state.set(
                    idx,
                    alice.get(ia) * c64(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                );
            }
        }
        // Measurements: read the flag, answer by the table of the sector.
        let answer = |k: usize, round: usize, theta: usize| -> usize {
            let (s0, s1) = sectors[k][round];
            if theta == 0 {
                s0 as usize
            } else {
                s1 as usize
            }
        };
        let meas: Vec<quantum::Pvm> = (0..4usize)
            .map(|q| {
                let qd = games::digits(q, 2, 2);
                let elems: Vec<Matrix> = (0..4usize)
                    .map(|y| {
                        let yd = games::digits(y, 2, 2);
                        let mut e = Matrix::zeros(2, 2);
                        for k in 0..2usize {
                            if (0..2).all(|r| answer(k, r, qd[r]) == yd[r]) {
                                e[(k, k)] = num_complex::Complex64::ONE;
                            }
                        }
                        e
                    })
                    .collect();
                quantum::Pvm::new(elems).unwrap()
            })
            .collect();
        let s = PureStrategy {
            bob_dim: 2,
            charlie_dim: 2,
            aux_dim: 1,
            bob_meas: meas.clone(),
            charlie_meas: meas,
            state: state.normalized(),
        };
        let report = extract_exact_parallel(&g2, &s).unwrap();
        assert!(report.residual_distance <= 1e-5);
        assert_eq!(report.components.len(), 2);
        for comp in &report.components {
            assert_close(comp.weight, 0.5, 1e-6);
        }
        let labels: Vec<Vec<(u8, u8)>> =
            report.components.iter().map(|c| c.sector.clone()).collect();
        assert!(labels.contains(&sectors[0]) && labels.contains(&sectors[1]));
    }

    #[test]
    fn exact_parallel_extraction_at_three_rounds() {
        let g = make_tfkw();
        let g3 = parallel_repeat(&g, 3).unwrap();
        let prod = product_pure_strategies(
            &g,
            &[
                canonical_pure(0, 0),
                canonical_pure(1, 1),
                canonical_pure(0, 1),
            ],
        )
        .unwrap();
        let report = extract_exact_parallel(&g3, &prod).unwrap();
        assert!(
            report.residual_distance <= 1e-5,
            "{}",
            report.residual_distance
        );
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].sector, vec![(0, 0), (1, 1), (0, 1)]);
        assert!(report.passed);

        // The robust extractor agrees through the good-set machinery.
        let (good, robust) = extract_robust_parallel(&g3, &prod, 1e-6).unwrap();
        assert!(good.sizes_ok);
        assert!(robust.residual_distance <= 1e-4);
        assert!(robust.passed);

        // Four rounds exceed the sector cap.
        let g4 = parallel_repeat(&g, 4).unwrap();
        let prod4 = product_pure_strategies(&g, &vec![canonical_pure(0, 0); 4]).unwrap();
        assert!(matches!(
            extract_exact_parallel(&g4, &prod4),
            Err(Error::DimensionCap(_, _))
        ));
    }

    #[test]
    fn good_sets_are_large_for_random_strategies() {
        let g = make_tfkw();
        let mut rng = sample::rng(37);
        for n in [2usize, 3] {
            let gn = parallel_repeat(&g, n).unwrap();
            for _ in 0..10 {
                let s = games::sampler::random_pure_strategy(&gn, 2, 2, &mut rng);
                // Post-select on the hypothesis with the measured per-round
                // bound: ε = max_i (𝔴* − 𝔴^i).
                let eps = (0..n)
                    .map(|i| OPTIMAL_WIN - ith_winning_probability_pure(&gn, &s, i).unwrap())
                    .fold(0.0f64, f64::max)
                    .max(0.0);
                let report = good_sets(&gn, &s, eps).unwrap();
                assert!(report.sizes_ok, "n={n} sizes {:?}", report.good_sets);
                for good in &report.good_sets {
                    assert!(8 * good.len() > 3 * (1 << n));
                }
                // Membership really means ε_{φ,i} ≤ 5ε.
                for (i, row) in report.eps_phi.iter().enumerate() {
                    for (label, e) in row {
                        if report.good_sets[i].contains(label) {
                            assert!(*e <= 5.0 * eps + 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn robust_parallel_extraction_exact_product() {
        let g = make_tfkw();
        let g2 = parallel_repeat(&g, 2).unwrap();
        let prod =
            product_pure_strategies(&g, &[canonical_pure(0, 0), canonical_pure(0, 1)]).unwrap();
        let (good, report) = extract_robust_parallel(&g2, &prod, 1e-6).unwrap();
        assert!(good.sizes_ok);
        // Full good sets in the exact case.
        for set in &good.good_sets {
            assert_eq!(set.len(), 2);
        }
        assert!(report.residual_distance <= 1e-4);
        assert!(report.passed);
    }

    #[test]
    fn robust_parallel_extraction_of_perturbed_products() {
        let g = make_tfkw();
        let g2 = parallel_repeat(&g, 2).unwrap();
        let delta = 0.03;
        let parts: Vec<PureStrategy> = (0..2).map(|_| perturbed_canonical(delta)).collect();
        let prod = product_pure_strategies(&g, &parts).unwrap();
        let eps = (0..2)
            .map(|i| OPTIMAL_WIN - ith_winning_probability_pure(&g2, &prod, i).unwrap())
            .fold(0.0f64, f64::max);
        let (good, report) = extract_robust_parallel(&g2, &prod, eps * 1.001).unwrap();
        assert!(good.sizes_ok);
        assert!(report.epsilon > 0.0);
        assert!(report.residual_distance <= report.theorem_bound);
        assert!(report.passed);
        // The empirical ratio is minuscule compared to the loose constant.
        assert!(report.residual_over_sqrt_eps.unwrap() < 10.0);

        // Independent prediction: the players' registers are trivial, so the
        // whole state lands in one sector and the projection arithmetic gives
        // ⟨φ|ψ'⟩ = cos²δ, hence residual = √(2 − 2cos²δ) = √2·sin δ.
        let predicted = std::f64::consts::SQRT_2 * delta.sin();
        assert_close(report.residual_distance, predicted, 1e-9);
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].sector, vec![(0, 0), (0, 0)]);
        // And ε itself has the closed form cos(π/4)·sin²δ per round.
        let predicted_eps = std::f64::consts::FRAC_1_SQRT_2 * delta.sin().powi(2);
        assert_close(report.epsilon, predicted_eps * 1.001, 1e-9);
    }

    #[test]
    fn compare_substrategies_on_products_and_perturbations() {
        let g = make_tfkw();
        let g2 = parallel_repeat(&g, 2).unwrap();

        // Exact optimal product: prefixes act identically.
        let prod =
            product_pure_strategies(&g, &[canonical_pure(0, 0), canonical_pure(1, 1)]).unwrap();
        let cmp = compare_substrategies(&g2, &prod, 0, &[0, 0], &[0, 1]).unwrap();
        assert!(cmp.max_difference <= 1e-8);
        assert!(cmp.passed);

        // Perturbed product: positive difference, still within Q√(5ε).
        let parts: Vec<PureStrategy> = (0..2).map(|_| perturbed_canonical(0.02)).collect();
        let pert = product_pure_strategies(&g, &parts).unwrap();
        let cmp = compare_substrategies(&g2, &pert, 0, &[0, 0], &[0, 1]).unwrap();
        assert!(cmp.bound >= cmp.max_difference);
        assert!(cmp.passed);

        // n = 1: only φ = 0, difference degenerates to zero.
        let s1 = canonical_pure(0, 0);
        let cmp = compare_substrategies(&g, &s1, 0, &[0], &[0]).unwrap();
        assert!(cmp.max_difference <= 1e-12);
    }

    #[test]
    fn dilated_observables_act_as_signs_on_components() {
        // B'_θ ψ_s = (−1)^{s_θ} ψ_s: the sector of each component determines
        // the dilated observable action.
        let g = make_tfkw();
        let mix = games::canonical_mixture();
        let pure = games::purify_strategy(&g, &mix).unwrap();
        let report = extract_exact(&g, &pure).unwrap();
        let layout = DilatedLayout {
            rounds: 1,
            bob_inner: report.bob_inner_dim,
            charlie_inner: report.charlie_inner_dim,
            aux: report.aux_dim,
        };
        let (bdil, cdil) = report.dilated_dims();
        for comp in &report.components {
            let t = super::sector_index_of(&comp.sector);
            let mut full = StateVector::zeros(layout.total_dim());
            layout.add_component(&mut full, t, &comp.inner_state, 1.0);
            let full = full.normalized();
            for theta in 0..2usize {
                // Dilated observable Σ_s (−1)^{s_θ} Π_s on Bob's factor.
                let mut bprime = Matrix::zeros(bdil, bdil);
                for sector in 0..4usize {
                    let sign = if (sector >> theta) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    };
                    for j in 0..report.bob_inner_dim {
                        let k = sector * report.bob_inner_dim + j;
                        bprime[(k, k)] = c64(sign, 0.0);
                    }
                }
                let dims = [2, bdil, cdil, report.aux_dim];
                let applied = apply_to_factor(&bprime, &full, &dims, 1);
                let (s0, s1) = comp.sector[0];
                let expected_sign = if (if theta == 0 { s0 } else { s1 }) == 1 {
                    -1.0
                } else {
                    1.0
                };
                assert!(applied.sub(&full.scale(c64(expected_sign, 0.0))).norm() < 1e-9);
            }
        }
    }
}
