//! Monogamy-of-entanglement games and strategies: winning probabilities,
//! per-round (i-th) winning probabilities, bias, the game polynomial, and the
//! sum-of-squares certificate that pins the optimal bias of the TFKW game at
//! √2.
//!
//! Every game is stored as an n-fold product of a base round (n = 1 for
//! plain games), so parallel repetitions never materialize their exponential
//! measurement family; Alice's product elements are assembled on demand.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::{apply_to_factor, c64, Matrix, StateVector};
use crate::quantum::{self, Povm, Pvm};
use crate::{Error, Result, DIM_CAP, TOL};

/// cos²(π/8) = ½ + 1/(2√2), the optimal TFKW winning probability.
pub const OPTIMAL_WIN: f64 = 0.5 + 0.5 * std::f64::consts::FRAC_1_SQRT_2;

/// A monogamy-of-entanglement game: Alice's question set, answer set, space,
/// question distribution, and measurement family. Stored as `rounds`
/// independent copies of a base round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoeGame {
    rounds: usize,
    base_questions: Vec<String>,
    base_answers: Vec<String>,
    base_alice_dim: usize,
    base_question_dist: Vec<f64>,
    base_alice_meas: Vec<Povm>,
}

impl MoeGame {
    /// Single-round game from explicit data.
    pub fn new(
        questions: Vec<String>,
        answers: Vec<String>,
        alice_dim: usize,
        question_dist: Vec<f64>,
        alice_meas: Vec<Povm>,
    ) -> Result<Self> {
        if questions.len() != question_dist.len() || questions.len() != alice_meas.len() {
            return Err(Error::InvalidParams(
                "questions, distribution, and measurements must align".into(),
            ));
        }
        let total: f64 = question_dist.iter().sum();
        if (total - 1.0).abs() > TOL || question_dist.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParams(
                "question distribution must be a probability distribution".into(),
            ));
        }
        for m in &alice_meas {
            if m.dim() != alice_dim {
                return Err(Error::DimensionMismatch(
                    "measurement does not act on Alice's space".into(),
                ));
            }
            if m.outcomes() != answers.len() {
                return Err(Error::InvalidParams(
                    "measurement outcomes must match the answer set".into(),
                ));
            }
        }
        Ok(MoeGame {
            rounds: 1,
            base_questions: questions,
            base_answers: answers,
            base_alice_dim: alice_dim,
            base_question_dist: question_dist,
            base_alice_meas: alice_meas,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn base_question_count(&self) -> usize {
        self.base_questions.len()
    }

    pub fn base_answer_count(&self) -> usize {
        self.base_answers.len()
    }

    pub fn base_alice_dim(&self) -> usize {
        self.base_alice_dim
    }

    pub fn base_alice_meas(&self, theta: usize) -> &Povm {
        &self.base_alice_meas[theta]
    }

    pub fn question_count(&self) -> usize {
        self.base_questions.len().pow(self.rounds as u32)
    }

    pub fn answer_count(&self) -> usize {
        self.base_answers.len().pow(self.rounds as u32)
    }

    pub fn alice_dim(&self) -> usize {
        self.base_alice_dim.pow(self.rounds as u32)
    }

    /// Per-round digits of a product-game index, most significant round first.
    pub fn question_digits(&self, theta: usize) -> Vec<usize> {
        digits(theta, self.base_questions.len(), self.rounds)
    }

    pub fn answer_digits(&self, y: usize) -> Vec<usize> {
        digits(y, self.base_answers.len(), self.rounds)
    }

    pub fn question_label(&self, theta: usize) -> String {
        self.question_digits(theta)
            .iter()
            .map(|&d| self.base_questions[d].clone())
            .collect()
    }

    pub fn question_index(&self, label: &str) -> Option<usize> {
        (0..self.question_count()).find(|&t| self.question_label(t) == label)
    }

    pub fn question_probability(&self, theta: usize) -> f64 {
        self.question_digits(theta)
            .iter()
            .map(|&d| self.base_question_dist[d])
            .product()
    }

    /// Alice's measurement element for a full question/answer pair, built as
    /// a Kronecker product of the per-round elements.
    pub fn alice_element(&self, theta: usize, y: usize) -> Matrix {
        let t = self.question_digits(theta);
        let a = self.answer_digits(y);
        let mut out: Option<Matrix> = None;
        for (ti, yi) in t.into_iter().zip(a) {
            let e = self.base_alice_meas[ti].element(yi);
            out = Some(match out {
                None => e.clone(),
                Some(acc) => acc.tensor(e),
            });
        }
        out.expect("at least one round")
    }

    /// Apply Alice's element for (theta, y) to the Alice block of a state
    /// whose factor layout is `rounds` copies of the base dimension followed
    /// by `tail_dims`.
    fn alice_apply(
        &self,
        theta: usize,
        y: usize,
        psi: &StateVector,
        tail_dims: &[usize],
    ) -> StateVector {
        let mut dims: Vec<usize> = vec![self.base_alice_dim; self.rounds];
        dims.extend_from_slice(tail_dims);
        let t = self.question_digits(theta);
        let a = self.answer_digits(y);
        let mut cur = psi.clone();
        for i in 0..self.rounds {
            cur = apply_to_factor(self.base_alice_meas[t[i]].element(a[i]), &cur, &dims, i);
        }
        cur
    }
}

/// Big-endian digits of an index in the given base.
pub fn digits(mut idx: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0usize; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
    out
}

pub fn index_from_digits(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

/// The TFKW game: one qubit, computational or Hadamard basis uniformly at
/// random, answers in Z₂.
pub fn make_tfkw() -> MoeGame {
    MoeGame::new(
        vec!["0".into(), "1".into()],
        vec!["0".into(), "1".into()],
        2,
        vec![0.5, 0.5],
        vec![
            quantum::conjugate_basis(0).as_povm().clone(),
            quantum::conjugate_basis(1).as_povm().clone(),
        ],
    )
    .expect("fixed valid game")
}

/// n-fold parallel repetition: product questions, answers, distribution, and
/// measurements.
pub fn parallel_repeat(g: &MoeGame, n: usize) -> Result<MoeGame> {
    if n == 0 {
        return Err(Error::InvalidParams("need at least one round".into()));
    }
    let new_rounds = g.rounds * n;
    let dim = g
        .base_alice_dim
        .checked_pow(new_rounds as u32)
        .ok_or(Error::DimensionCap(usize::MAX, DIM_CAP))?;
    if dim > DIM_CAP {
        return Err(Error::DimensionCap(dim, DIM_CAP));
    }
    Ok(MoeGame {
        rounds: new_rounds,
        ..g.clone()
    })
}

/// The single-round TFKW game with Alice's measurement embedded on qubit
/// `i` of `n`: used to evaluate extracted sub-strategies of a parallel game.
pub fn tfkw_embedded(n: usize, i: usize) -> Result<MoeGame> {
    if i >= n {
        return Err(Error::IndexOutOfRange(format!("qubit {i} of {n}")));
    }
    let dim = 1usize
        .checked_shl(n as u32)
        .filter(|&d| d <= DIM_CAP)
        .ok_or(Error::DimensionCap(usize::MAX, DIM_CAP))?;
    let base = make_tfkw();
    let left = Matrix::identity(1 << i);
    let right = Matrix::identity(1 << (n - 1 - i));
    let embed = |m: &Matrix| left.tensor(m).tensor(&right);
    let meas = (0..2)
        .map(|t| {
            Povm::new(
                (0..2)
                    .map(|y| embed(base.base_alice_meas[t].element(y)))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    MoeGame::new(
        vec!["0".into(), "1".into()],
        vec!["0".into(), "1".into()],
        dim,
        vec![0.5, 0.5],
        meas,
    )
}

/// General quantum strategy: POVM families for Bob and Charlie plus a shared
/// density matrix on A ⊗ B ⊗ C.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Strategy {
    pub bob_dim: usize,
    pub charlie_dim: usize,
    pub bob_meas: Vec<Povm>,
    pub charlie_meas: Vec<Povm>,
    pub state: Matrix,
}

/// Purified strategy: projective measurements and a pure shared state on
/// A ⊗ B ⊗ C ⊗ R with an explicit auxiliary register.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PureStrategy {
    pub bob_dim: usize,
    pub charlie_dim: usize,
    pub aux_dim: usize,
    pub bob_meas: Vec<Pvm>,
    pub charlie_meas: Vec<Pvm>,
    pub state: StateVector,
}

impl Strategy {
    pub fn validate(&self, game: &MoeGame) -> Result<()> {
        let q = game.question_count();
        if self.bob_meas.len() != q || self.charlie_meas.len() != q {
            return Err(Error::InvalidParams(
                "strategy must supply one measurement per question".into(),
            ));
        }
        for m in self.bob_meas.iter().chain(&self.charlie_meas) {
            if m.outcomes() != game.answer_count() {
                return Err(Error::InvalidParams(
                    "measurement outcomes must match the answer set".into(),
                ));
            }
        }
        if self.bob_meas.iter().any(|m| m.dim() != self.bob_dim)
            || self
                .charlie_meas
                .iter()
                .any(|m| m.dim() != self.charlie_dim)
        {
            return Err(Error::DimensionMismatch("measurement dimensions".into()));
        }
        let dim = game.alice_dim() * self.bob_dim * self.charlie_dim;
        if self.state.rows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs A⊗B⊗C = {dim}",
                self.state.rows()
            )));
        }
        if !self.state.is_density(crate::EIG_TOL) {
            return Err(Error::NotDensity("strategy state".into()));
        }
        Ok(())
    }
}

impl PureStrategy {
    /// Factor dimensions [A, B, C, R] given the game.
    pub fn dims(&self, game: &MoeGame) -> [usize; 4] {
        [
            game.alice_dim(),
            self.bob_dim,
            self.charlie_dim,
            self.aux_dim,
        ]
    }

    pub fn validate(&self, game: &MoeGame) -> Result<()> {
        let q = game.question_count();
        if self.bob_meas.len() != q || self.charlie_meas.len() != q {
            return Err(Error::InvalidParams(
                "strategy must supply one measurement per question".into(),
            ));
        }
        let dim: usize = self.dims(game).iter().product();
        if self.state.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs A⊗B⊗C⊗R = {dim}",
                self.state.dim()
            )));
        }
        if (self.state.norm() - 1.0).abs() > crate::EIG_TOL {
            return Err(Error::InvalidParams("state is not normalized".into()));
        }
        Ok(())
    }

    /// Bob's observable B_θ = B^θ_0 − B^θ_1 for a two-answer game.
    pub fn bob_observable(&self, theta: usize) -> Result<Matrix> {
        observable_of(self.bob_meas[theta].as_povm())
    }

    pub fn charlie_observable(&self, theta: usize) -> Result<Matrix> {
        observable_of(self.charlie_meas[theta].as_povm())
    }
}

/// The observable P₀ − P₁ of a two-outcome POVM; unitary exactly when the
/// measurement is projective.
pub fn observable_of(p: &Povm) -> Result<Matrix> {
    if p.outcomes() != 2 {
        return Err(Error::TwoAnswersRequired(p.outcomes()));
    }
    Ok(p.element(0).sub(p.element(1)))
}

/// The four unentangled optimal TFKW strategies: Alice gets X^{s0}Z^{s1}|β⟩,
/// Bob and Charlie hold trivial registers and answer s_θ on question θ.
pub fn canonical_strategy(s0: u8, s1: u8) -> Strategy {
    let meas: Vec<Povm> = (0..2u8)
        .map(|theta| {
            let answer = if theta == 0 { s0 } else { s1 };
            let elems = (0..2u8)
                .map(|y| Matrix::from_real(1, 1, &[if y == answer { 1.0 } else { 0.0 }]).unwrap())
                .collect();
            Povm::new_unchecked(elems)
        })
        .collect();
    Strategy {
        bob_dim: 1,
        charlie_dim: 1,
        bob_meas: meas.clone(),
        charlie_meas: meas,
        state: quantum::wb_state(s0, s1).projector(),
    }
}

/// Purified form of [`canonical_strategy`].
pub fn canonical_pure(s0: u8, s1: u8) -> PureStrategy {
    let meas: Vec<Pvm> = (0..2u8)
        .map(|theta| {
            let answer = if theta == 0 { s0 } else { s1 };
            let elems = (0..2u8)
                .map(|y| Matrix::from_real(1, 1, &[if y == answer { 1.0 } else { 0.0 }]).unwrap())
                .collect();
            Pvm::new(elems).unwrap()
        })
        .collect();
    PureStrategy {
        bob_dim: 1,
        charlie_dim: 1,
        aux_dim: 1,
        bob_meas: meas.clone(),
        charlie_meas: meas,
        state: quantum::wb_state(s0, s1),
    }
}

/// Tensor two pure strategies into one for the product game; factors are
/// regrouped to (A₁A₂)(B₁B₂)(C₁C₂)(R₁R₂).
pub fn product_pure_strategy(
    g1: &MoeGame,
    s1: &PureStrategy,
    g2: &MoeGame,
    s2: &PureStrategy,
) -> Result<PureStrategy> {
    let d1 = s1.dims(g1);
    let d2 = s2.dims(g2);
    let joint = s1.state.tensor(&s2.state);
    let dims = [d1[0], d1[1], d1[2], d1[3], d2[0], d2[1], d2[2], d2[3]];
    let state = joint.permute(&dims, &[0, 4, 1, 5, 2, 6, 3, 7]);

    let (q1, q2) = (g1.question_count(), g2.question_count());
    let (a1, a2) = (g1.answer_count(), g2.answer_count());
    let pair = |m1: &[Pvm], m2: &[Pvm]| -> Result<Vec<Pvm>> {
        let mut out = Vec::with_capacity(q1 * q2);
        for p1 in m1.iter().take(q1) {
            for p2 in m2.iter().take(q2) {
                let mut elems = Vec::with_capacity(a1 * a2);
                for y1 in 0..a1 {
                    for y2 in 0..a2 {
                        elems.push(p1.element(y1).tensor(p2.element(y2)));
                    }
                }
                out.push(Pvm::new(elems)?);
            }
        }
        Ok(out)
    };
    Ok(PureStrategy {
        bob_dim: d1[1] * d2[1],
        charlie_dim: d1[2] * d2[2],
        aux_dim: d1[3] * d2[3],
        bob_meas: pair(&s1.bob_meas, &s2.bob_meas)?,
        charlie_meas: pair(&s1.charlie_meas, &s2.charlie_meas)?,
        state,
    })
}

/// n-fold product of one pure strategy with itself (or fold over a list).
pub fn product_pure_strategies(game: &MoeGame, parts: &[PureStrategy]) -> Result<PureStrategy> {
    let mut acc_game = game.clone();
    let mut acc = parts[0].clone();
    for part in &parts[1..] {
        let next_game = parallel_repeat(game, acc_game.rounds() / game.rounds() + 1)?;
        acc = product_pure_strategy(&acc_game, &acc, game, part)?;
        acc_game = next_game;
    }
    Ok(acc)
}

/// E_θ Σ_y Tr[(A^θ_y ⊗ B^θ_y ⊗ C^θ_y) ρ] for a general strategy.
pub fn winning_probability(game: &MoeGame, s: &Strategy) -> Result<f64> {
    s.validate(game)?;
    let mut w = 0.0;
    for theta in 0..game.question_count() {
        let pi = game.question_probability(theta);
        if pi == 0.0 {
            continue;
        }
        let mut total = 0.0;
        for y in 0..game.answer_count() {
            let m = game
                .alice_element(theta, y)
                .tensor(s.bob_meas[theta].element(y))
                .tensor(s.charlie_meas[theta].element(y));
            total += m.mul(&s.state).trace().re;
        }
        w += pi * total;
    }
    Ok(w)
}

/// Winning probability of a purified strategy, evaluated factor-wise
/// without building operators on the joint space.
pub fn winning_probability_pure(game: &MoeGame, s: &PureStrategy) -> Result<f64> {
    s.validate(game)?;
    let tail = [s.bob_dim, s.charlie_dim, s.aux_dim];
    let full_dims = [game.alice_dim(), s.bob_dim, s.charlie_dim, s.aux_dim];
    let mut w = 0.0;
    for theta in 0..game.question_count() {
        let pi = game.question_probability(theta);
        if pi == 0.0 {
            continue;
        }
        let mut total = 0.0;
        for y in 0..game.answer_count() {
            let mut cur = game.alice_apply(theta, y, &s.state, &tail);
            cur = apply_to_factor(s.bob_meas[theta].element(y), &cur, &full_dims, 1);
            cur = apply_to_factor(s.charlie_meas[theta].element(y), &cur, &full_dims, 2);
            total += s.state.inner(&cur).re;
        }
        w += pi * total;
    }
    Ok(w)
}

/// Marginal measurement element Σ_{x : x_i = y} P^θ_x for round `i` of a
/// parallel game with binary base answers.
pub fn marginal_element(povm_elements: &[Matrix], rounds: usize, i: usize, y: usize) -> Matrix {
    let dim = povm_elements[0].rows();
    let mut acc = Matrix::zeros(dim, dim);
    for (x, e) in povm_elements.iter().enumerate() {
        if digits(x, 2, rounds)[i] == y {
            acc = acc.add(e);
        }
    }
    acc
}

/// i-th winning probability of a parallel game: both players must get round
/// i right, all other rounds marginalized.
pub fn ith_winning_probability(game: &MoeGame, s: &Strategy, i: usize) -> Result<f64> {
    s.validate(game)?;
    let n = game.rounds();
    if i >= n {
        return Err(Error::IndexOutOfRange(format!("round {i} of {n}")));
    }
    if game.base_answer_count() != 2 {
        return Err(Error::TwoAnswersRequired(game.base_answer_count()));
    }
    let d_base = game.base_alice_dim();
    let mut w = 0.0;
    for theta in 0..game.question_count() {
        let pi = game.question_probability(theta);
        if pi == 0.0 {
            continue;
        }
        let t = game.question_digits(theta);
        let bob: Vec<Matrix> = (0..2)
            .map(|y| marginal_element(s.bob_meas[theta].elements(), n, i, y))
            .collect();
        let charlie: Vec<Matrix> = (0..2)
            .map(|y| marginal_element(s.charlie_meas[theta].elements(), n, i, y))
            .collect();
        for y in 0..2 {
            let left = Matrix::identity(d_base.pow(i as u32));
            let right = Matrix::identity(d_base.pow((n - 1 - i) as u32));
            let alice = left
                .tensor(game.base_alice_meas(t[i]).element(y))
                .tensor(&right);
            let m = alice.tensor(&bob[y]).tensor(&charlie[y]);
            w += pi * m.mul(&s.state).trace().re;
        }
    }
    Ok(w)
}

/// i-th winning probability for a purified strategy, factor-wise.
pub fn ith_winning_probability_pure(game: &MoeGame, s: &PureStrategy, i: usize) -> Result<f64> {
    s.validate(game)?;
    let n = game.rounds();
    if i >= n {
        return Err(Error::IndexOutOfRange(format!("round {i} of {n}")));
    }
    if game.base_answer_count() != 2 {
        return Err(Error::TwoAnswersRequired(game.base_answer_count()));
    }
    let mut qubit_dims: Vec<usize> = vec![game.base_alice_dim(); n];
    qubit_dims.extend_from_slice(&[s.bob_dim, s.charlie_dim, s.aux_dim]);
    let coarse_dims = [game.alice_dim(), s.bob_dim, s.charlie_dim, s.aux_dim];
    let mut w = 0.0;
    for theta in 0..game.question_count() {
        let pi = game.question_probability(theta);
        if pi == 0.0 {
            continue;
        }
        let t = game.question_digits(theta);
        for y in 0..2 {
            let mut cur = apply_to_factor(
                game.base_alice_meas(t[i]).element(y),
                &s.state,
                &qubit_dims,
                i,
            );
            let bob = marginal_element(s.bob_meas[theta].as_povm().elements(), n, i, y);
            let charlie = marginal_element(s.charlie_meas[theta].as_povm().elements(), n, i, y);
            cur = apply_to_factor(&bob, &cur, &coarse_dims, 1);
            cur = apply_to_factor(&charlie, &cur, &coarse_dims, 2);
            w += pi * s.state.inner(&cur).re;
        }
    }
    Ok(w)
}

/// Bias 4𝔴 − 2 of a two-answer game strategy; cross-checked against the
/// observable expression E_θ Tr[(A_θ⊗(b_θ+c_θ) − 1⊗(1−b_θc_θ))ρ].
pub fn bias(game: &MoeGame, s: &Strategy) -> Result<f64> {
    if game.answer_count() != 2 {
        return Err(Error::TwoAnswersRequired(game.answer_count()));
    }
    let w = winning_probability(game, s)?;
    let primary = 4.0 * w - 2.0;

    let mut via_observables = 0.0;
    let a_dim = game.alice_dim();
    for theta in 0..game.question_count() {
        let pi = game.question_probability(theta);
        let a_obs = observable_of(&Povm::new_unchecked(vec![
            game.alice_element(theta, 0),
            game.alice_element(theta, 1),
        ]))?;
        let b_obs = observable_of(&s.bob_meas[theta])?;
        let c_obs = observable_of(&s.charlie_meas[theta])?;
        let b_full = b_obs.tensor(&Matrix::identity(s.charlie_dim));
        let c_full = Matrix::identity(s.bob_dim).tensor(&c_obs);
        let corr = a_obs.tensor(&b_full.add(&c_full));
        let anti = Matrix::identity(a_dim)
            .tensor(&Matrix::identity(s.bob_dim * s.charlie_dim).sub(&b_full.mul(&c_full)));
        via_observables += pi * corr.sub(&anti).mul(&s.state).trace().re;
    }
    if (primary - via_observables).abs() > crate::EIG_TOL {
        return Err(Error::Precondition(format!(
            "bias routes disagree: {primary} vs {via_observables}"
        )));
    }
    Ok(primary)
}

/// The game polynomial Σ_θ π(θ)(A_θ⊗(b_θ+c_θ) − 1⊗(1−b_θ c_θ)) on A⊗B⊗C for
/// a two-answer game and projective strategy; its expectation in the
/// strategy state is the bias.
pub fn game_polynomial(game: &MoeGame, s: &PureStrategy) -> Result<Matrix> {
    if game.answer_count() != 2 {
        return Err(Error::TwoAnswersRequired(game.answer_count()));
    }
    s.validate(game)?;
    let a_dim = game.alice_dim();
    let bc = s.bob_dim * s.charlie_dim;
    let mut poly = Matrix::zeros(a_dim * bc, a_dim * bc);
    for theta in 0..game.question_count() {
        let pi = game.question_probability(theta);
        let a_obs = observable_of(&Povm::new_unchecked(vec![
            game.alice_element(theta, 0),
            game.alice_element(theta, 1),
        ]))?;
        let b = s
            .bob_observable(theta)?
            .tensor(&Matrix::identity(s.charlie_dim));
        let c = Matrix::identity(s.bob_dim).tensor(&s.charlie_observable(theta)?);
        let corr = a_obs.tensor(&b.add(&c));
        let anti = Matrix::identity(a_dim).tensor(&Matrix::identity(bc).sub(&b.mul(&c)));
        poly = poly.add(&corr.sub(&anti).scale(c64(pi, 0.0)));
    }
    Ok(poly)
}

/// Expectation ⟨ψ|M ⊗ I_R|ψ⟩ of an A⊗B⊗C operator in the strategy state.
pub fn expectation_abc(game: &MoeGame, s: &PureStrategy, m: &Matrix) -> f64 {
    let abc = game.alice_dim() * s.bob_dim * s.charlie_dim;
    let dims = [abc, s.aux_dim];
    debug_assert_eq!(m.rows(), abc);
    let applied = apply_to_factor(m, &s.state, &dims, 0);
    s.state.inner(&applied).re
}

/// Values of the four sum-of-squares terms and the Frobenius residual of the
/// operator identity √2·I − P = SOS for the TFKW game.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SosReport {
    /// ‖(√2·I − P) − SOS‖_F; zero (to precision) for projective strategies.
    pub operator_residual: f64,
    /// ⟨ψ|S_k†S_k|ψ⟩ including coefficients, ordered: the two cross-player
    /// eigenvector terms, then the two swap terms.
    pub term_values: [f64; 4],
    /// ⟨ψ|√2 − P|ψ⟩ = sum of the four term values.
    pub gap: f64,
}

/// Verify the SOS certificate of the TFKW game polynomial on a projective
/// strategy and return the per-term values.
pub fn sos_residual(game: &MoeGame, s: &PureStrategy) -> Result<SosReport> {
    if game.rounds() != 1 || game.question_count() != 2 || game.alice_dim() != 2 {
        return Err(Error::Precondition(
            "sum-of-squares certificate is specific to the single-round TFKW game".into(),
        ));
    }
    s.validate(game)?;
    let z = quantum::pauli(quantum::Pauli::Z);
    let x = quantum::pauli(quantum::Pauli::X);
    let sqrt2 = std::f64::consts::SQRT_2;

    let bc = s.bob_dim * s.charlie_dim;
    let b0 = s
        .bob_observable(0)?
        .tensor(&Matrix::identity(s.charlie_dim));
    let b1 = s
        .bob_observable(1)?
        .tensor(&Matrix::identity(s.charlie_dim));
    let c0 = Matrix::identity(s.bob_dim).tensor(&s.charlie_observable(0)?);
    let c1 = Matrix::identity(s.bob_dim).tensor(&s.charlie_observable(1)?);

    let id_abc = Matrix::identity(2 * bc);
    let t1 = z
        .tensor(&b0)
        .add(&x.tensor(&c1))
        .sub(&id_abc.scale(c64(sqrt2, 0.0)));
    let t2 = z
        .tensor(&c0)
        .add(&x.tensor(&b1))
        .sub(&id_abc.scale(c64(sqrt2, 0.0)));
    let t3 = Matrix::identity(2).tensor(&b0.sub(&c0));
    let t4 = Matrix::identity(2).tensor(&b1.sub(&c1));

    let quarter_sqrt2 = 1.0 / (4.0 * sqrt2);
    let sos = t1
        .mul(&t1)
        .add(&t2.mul(&t2))
        .scale(c64(quarter_sqrt2, 0.0))
        .add(&t3.mul(&t3).add(&t4.mul(&t4)).scale(c64(0.25, 0.0)));

    let poly = game_polynomial(game, s)?;
    let target = id_abc.scale(c64(sqrt2, 0.0)).sub(&poly);
    let operator_residual = target.sub(&sos).frobenius_norm();

    let sq_expect = |t: &Matrix, coeff: f64| -> f64 { coeff * expectation_abc(game, s, &t.mul(t)) };
    let term_values = [
        sq_expect(&t1, quarter_sqrt2),
        sq_expect(&t2, quarter_sqrt2),
        sq_expect(&t3, 0.25),
        sq_expect(&t4, 0.25),
    ];
    let gap = expectation_abc(game, s, &target);
    Ok(SosReport {
        operator_residual,
        term_values,
        gap,
    })
}

/// Purify a strategy: Naimark-dilate every non-projective measurement (one
/// ancilla per dilated question, appended to that party's space) and purify
/// the shared state; the winning probability is preserved.
pub fn purify_strategy(game: &MoeGame, s: &Strategy) -> Result<PureStrategy> {
    s.validate(game)?;
    let a_dim = game.alice_dim();

    // Dilate one party; returns the projective family, the new dimension,
    // and the total embedding isometry for the state.
    let dilate_party = |meas: &[Povm], dim: usize| -> Result<(Vec<Pvm>, usize, Matrix)> {
        let mut current: Vec<Povm> = meas.to_vec();
        let mut cur_dim = dim;
        let mut embed = Matrix::identity(dim);
        loop {
            let target = current.iter().position(|m| !m.is_projective(TOL));
            let Some(idx) = target else { break };
            let dilation = quantum::naimark_dilate(&current[idx])?;
            let k = dilation.ancilla_dim;
            let mut next: Vec<Povm> = Vec::with_capacity(current.len());
            for (j, m) in current.iter().enumerate() {
                if j == idx {
                    next.push(dilation.pvm.as_povm().clone());
                } else {
                    let padded: Vec<Matrix> = m
                        .elements()
                        .iter()
                        .map(|e| e.tensor(&Matrix::identity(k)))
                        .collect();
                    next.push(Povm::new_unchecked(padded));
                }
            }
            current = next;
            embed = dilation.embedding.mul(&embed);
            cur_dim *= k;
            if cur_dim > DIM_CAP {
                return Err(Error::DimensionCap(cur_dim, DIM_CAP));
            }
        }
        let pvms = current
            .into_iter()
            .map(|m| Pvm::new(m.elements().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok((pvms, cur_dim, embed))
    };

    let (bob_meas, bob_dim, bob_embed) = dilate_party(&s.bob_meas, s.bob_dim)?;
    let (charlie_meas, charlie_dim, charlie_embed) = dilate_party(&s.charlie_meas, s.charlie_dim)?;

    let full_embed = Matrix::identity(a_dim)
        .tensor(&bob_embed)
        .tensor(&charlie_embed);
    let embedded = full_embed.mul(&s.state).mul(&full_embed.dagger());
    let psi = quantum::purify_state(&embedded)?;
    let aux_dim = psi.dim() / (a_dim * bob_dim * charlie_dim);

    Ok(PureStrategy {
        bob_dim,
        charlie_dim,
        aux_dim,
        bob_meas,
        charlie_meas,
        state: psi,
    })
}

/// Uniform classical mixture of the four canonical strategies realized with
/// orthogonal flag registers on Bob and Charlie: each party reads its flag
/// and answers by the optimal table.
pub fn canonical_mixture() -> Strategy {
    let sectors = [(0u8, 0u8), (1, 0), (0, 1), (1, 1)];
    let mut state = Matrix::zeros(32, 32);
    for (k, &(s0, s1)) in sectors.iter().enumerate() {
        let alice = quantum::wb_state(s0, s1);
        let flag = StateVector::basis_state(4, k);
        let joint = alice.tensor(&flag).tensor(&flag);
        state = state.add(&joint.projector().scale(c64(0.25, 0.0)));
    }
    let meas: Vec<Povm> = (0..2usize)
        .map(|theta| {
            let elems: Vec<Matrix> = (0..2u8)
                .map(|y| {
                    let mut e = Matrix::zeros(4, 4);
                    for (k, &(s0, s1)) in sectors.iter().enumerate() {
                        let answer = if theta == 0 { s0 } else { s1 };
                        if answer == y {
                            e[(k, k)] = Complex64::ONE;
                        }
                    }
                    e
                })
                .collect();
            Povm::new_unchecked(elems)
        })
        .collect();
    Strategy {
        bob_dim: 4,
        charlie_dim: 4,
        bob_meas: meas.clone(),
        charlie_meas: meas,
        state,
    }
}

/// Seeded random strategies.
pub mod sampler {
    use super::*;
    use rand::Rng;

    /// Random projective binary partition of the computational basis,
    /// conjugated by a Haar unitary: outcome y collects the basis indices
    /// congruent to y modulo the outcome count.
    pub fn random_pvm(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Pvm {
        let u = crate::matrix::sample::haar_unitary(dim, rng);
        let elems: Vec<Matrix> = (0..outcomes)
            .map(|y| {
                let mut pi_y = Matrix::zeros(dim, dim);
                for j in 0..dim {
                    if j % outcomes == y {
                        pi_y[(j, j)] = Complex64::ONE;
                    }
                }
                u.mul(&pi_y).mul(&u.dagger())
            })
            .collect();
        Pvm::new(elems).expect("conjugated partition is projective")
    }

    /// Haar state on A⊗B⊗C plus independent random projective measurements
    /// per question.
    pub fn random_pure_strategy(
        game: &MoeGame,
        bob_dim: usize,
        charlie_dim: usize,
        rng: &mut impl Rng,
    ) -> PureStrategy {
        let q = game.question_count();
        let a = game.answer_count();
        let state =
            crate::matrix::sample::haar_state(game.alice_dim() * bob_dim * charlie_dim, rng);
        PureStrategy {
            bob_dim,
            charlie_dim,
            aux_dim: 1,
            bob_meas: (0..q).map(|_| random_pvm(bob_dim, a, rng)).collect(),
            charlie_meas: (0..q).map(|_| random_pvm(charlie_dim, a, rng)).collect(),
            state,
        }
    }

    /// Random POVM with Gaussian-PSD elements normalized by the inverse
    /// square root of their sum.
    pub fn random_povm(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Povm {
        let parts: Vec<Matrix> = (0..outcomes)
            .map(|_| {
                let g = Matrix::from_fn(dim, dim, |_, _| {
                    c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                g.mul(&g.dagger())
            })
            .collect();
        let mut total = Matrix::zeros(dim, dim);
        for p in &parts {
            total = total.add(p);
        }
        // S^{-1/2} P_y S^{-1/2}
        let (vals, vecs) = total.eig_hermitian(crate::EIG_TOL).unwrap();
        let mut inv_root = Matrix::zeros(dim, dim);
        for (k, &v) in vals.iter().enumerate() {
            let s = c64(1.0 / v.max(1e-12).sqrt(), 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    inv_root[(i, j)] += vecs[(i, k)] * s * vecs[(j, k)].conj();
                }
            }
        }
        let elems: Vec<Matrix> = parts
            .iter()
            .map(|p| inv_root.mul(p).mul(&inv_root))
            .collect();
        Povm::new(elems).expect("normalized PSD family is a POVM")
    }

    /// Mixed-state strategy with POVM (generally non-projective)
    /// measurements.
    pub fn random_povm_strategy(
        game: &MoeGame,
        bob_dim: usize,
        charlie_dim: usize,
        rng: &mut impl Rng,
    ) -> Strategy {
        let q = game.question_count();
        let a = game.answer_count();
        Strategy {
            bob_dim,
            charlie_dim,
            bob_meas: (0..q).map(|_| random_povm(bob_dim, a, rng)).collect(),
            charlie_meas: (0..q).map(|_| random_povm(charlie_dim, a, rng)).collect(),
            state: crate::matrix::sample::random_density(
                game.alice_dim() * bob_dim * charlie_dim,
                rng,
            ),
        }
    }
}
