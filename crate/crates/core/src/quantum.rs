//! Named qubit operators and states, measurement types, and the purification
//! constructions: state purification and the Naimark dilation of a POVM to a
//! projective measurement on an extended space.

use num_complex::Complex64;

use crate::matrix::{c64, Matrix, StateVector};
use crate::{bits, Error, Result, TOL};

/// Which Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// The standard 2x2 Pauli matrices in the computational basis.
pub fn pauli(which: Pauli) -> Matrix {
    match which {
        Pauli::X => Matrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
        Pauli::Y => Matrix::from_rows(
            2,
            2,
            &[
                Complex64::ZERO,
                c64(0.0, -1.0),
                c64(0.0, 1.0),
                Complex64::ZERO,
            ],
        )
        .unwrap(),
        Pauli::Z => Matrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap(),
    }
}

pub fn hadamard() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_real(2, 2, &[s, s, s, -s]).unwrap()
}

/// The Hermitian unitary that diagonalises the Hadamard operator.
pub fn breidbart_operator() -> Matrix {
    let (c, s) = (
        std::f64::consts::FRAC_PI_8.cos(),
        std::f64::consts::FRAC_PI_8.sin(),
    );
    Matrix::from_real(2, 2, &[c, s, s, -c]).unwrap()
}

/// |β⟩, the +1 eigenstate of the Hadamard, midway between |0⟩ and |+⟩.
pub fn breidbart_state() -> StateVector {
    StateVector::from_real(&[
        std::f64::consts::FRAC_PI_8.cos(),
        std::f64::consts::FRAC_PI_8.sin(),
    ])
}

/// X^{s0} Z^{s1} |β⟩ for s ∈ Z₂².
pub fn wb_state(s0: u8, s1: u8) -> StateVector {
    let mut v = breidbart_state();
    if s1 == 1 {
        v = pauli(Pauli::Z).apply(&v);
    }
    if s0 == 1 {
        v = pauli(Pauli::X).apply(&v);
    }
    v
}

/// Multi-qubit tensor of X^{s0} Z^{s1} |β⟩ factors, one (s0, s1) per round.
pub fn wb_state_multi(sectors: &[(u8, u8)]) -> StateVector {
    sectors
        .iter()
        .map(|&(s0, s1)| wb_state(s0, s1))
        .reduce(|a, b| a.tensor(&b))
        .expect("at least one round")
}

/// Conjugate-coding state |x^θ⟩ = H^{θ_1}|x_1⟩ ⊗ ... ⊗ H^{θ_n}|x_n⟩.
pub fn conjugate_state(x: &[u8], theta: &[u8]) -> Result<StateVector> {
    if x.len() != theta.len() {
        return Err(Error::LengthMismatch(x.len(), theta.len()));
    }
    let h = hadamard();
    let mut out: Option<StateVector> = None;
    for (&xi, &ti) in x.iter().zip(theta) {
        let mut q = StateVector::basis_state(2, xi as usize);
        if ti == 1 {
            q = h.apply(&q);
        }
        out = Some(match out {
            None => q,
            Some(acc) => acc.tensor(&q),
        });
    }
    Ok(out.unwrap_or_else(|| StateVector::basis_state(1, 0)))
}

/// Wiesner-Breidbart state 𝔅^{⊗n} |x^θ⟩.
pub fn wiesner_breidbart_state(x: &[u8], theta: &[u8]) -> Result<StateVector> {
    let base = conjugate_state(x, theta)?;
    let mut out = base;
    let b = breidbart_operator();
    let dims: Vec<usize> = vec![2; x.len()];
    for i in 0..x.len() {
        out = crate::matrix::apply_to_factor(&b, &out, &dims, i);
    }
    Ok(out)
}

/// The eigenbasis of the Pauli Y operator: (|0_↻⟩, |1_↻⟩).
pub fn y_basis() -> (StateVector, StateVector) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (
        StateVector::new(vec![c64(s, 0.0), c64(0.0, s)]),
        StateVector::new(vec![c64(s, 0.0), c64(0.0, -s)]),
    )
}

/// Positive operator-valued measurement: PSD elements summing to the
/// identity. Outcomes are the element indices.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Povm {
    elements: Vec<Matrix>,
}

impl Povm {
    pub fn new(elements: Vec<Matrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::NotPovm("no elements".into()));
        }
        let dim = elements[0].rows();
        let mut sum = Matrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::NotPovm(format!("element {i} has wrong shape")));
            }
            if !e.is_psd(crate::EIG_TOL) {
                return Err(Error::NotPovm(format!("element {i} is not PSD")));
            }
            sum = sum.add(e);
        }
        let defect = sum.sub(&Matrix::identity(dim)).max_abs();
        if defect > TOL {
            return Err(Error::NotPovm(format!(
                "elements sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Povm { elements })
    }

    /// Skip validation; for internally-constructed measurements.
    pub(crate) fn new_unchecked(elements: Vec<Matrix>) -> Self {
        Povm { elements }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, outcome: usize) -> &Matrix {
        &self.elements[outcome]
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn projectivity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let prod = a.mul(b);
                let expected = if i == j {
                    a.clone()
                } else {
                    Matrix::zeros(a.rows(), a.cols())
                };
                worst = worst.max(prod.sub(&expected).max_abs());
            }
        }
        worst
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        self.projectivity_defect() <= tol
    }

    /// Born-rule outcome distribution on a density matrix.
    pub fn born_distribution(&self, rho: &Matrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| e.mul(rho).trace().re)
            .collect()
    }

    /// Rank-1 projective measurement onto the given orthonormal states.
    pub fn from_basis(states: &[StateVector]) -> Result<Self> {
        Povm::new(states.iter().map(|s| s.projector()).collect())
    }
}

/// Projector-valued measurement: a POVM whose elements are orthogonal
/// projectors.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Pvm(Povm);

impl Pvm {
    pub fn new(elements: Vec<Matrix>) -> Result<Self> {
        let p = Povm::new(elements)?;
        let defect = p.projectivity_defect();
        if defect > TOL {
            return Err(Error::NotProjective(defect));
        }
        Ok(Pvm(p))
    }

    pub fn as_povm(&self) -> &Povm {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn outcomes(&self) -> usize {
        self.0.outcomes()
    }

    pub fn element(&self, outcome: usize) -> &Matrix {
        self.0.element(outcome)
    }
}

/// Purify a density matrix: spectral decomposition with the auxiliary
/// register sized to the rank.
pub fn purify_state(rho: &Matrix) -> Result<StateVector> {
    if !rho.is_density(crate::EIG_TOL) {
        return Err(Error::NotDensity("purify_state input".into()));
    }
    let (vals, vecs) = rho.eig_hermitian(crate::EIG_TOL)?;
    let rank = vals.iter().filter(|&&v| v > 1e-12).count().max(1);
    let dim = rho.rows();
    let mut psi = StateVector::zeros(dim * rank);
    for (k, &val) in vals.iter().enumerate().take(rank) {
        let p = val.max(0.0).sqrt();
        for i in 0..dim {
            // |i⟩ ⊗ |k⟩_R ordering: system first, auxiliary second.
            psi.set(
                i * rank + k,
                psi.get(i * rank + k) + vecs[(i, k)] * c64(p, 0.0),
            );
        }
    }
    Ok(psi.phase_normalized())
}

/// Result of dilating a POVM to a projective measurement.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    /// Projective measurement on system ⊗ ancilla.
    pub pvm: Pvm,
    /// Isometry embedding the system: |ψ⟩ ↦ |ψ⟩ ⊗ |x₀⟩ with x₀ the first
    /// outcome label.
    pub embedding: Matrix,
    /// The unitary extending V|ψ⟩ = Σ_x √P_x |ψ⟩ ⊗ |x⟩.
    pub unitary: Matrix,
    pub ancilla_dim: usize,
}

/// Dilate a POVM to a PVM on system ⊗ ancilla: the dilated measurement on
/// ρ ⊗ |x₀⟩⟨x₀| reproduces the POVM statistics on ρ.
pub fn naimark_dilate(p: &Povm) -> Result<NaimarkDilation> {
    let d = p.dim();
    let k = p.outcomes();
    let ext = d * k;
    if ext > crate::DIM_CAP {
        return Err(Error::DimensionCap(ext, crate::DIM_CAP));
    }

    // V: H → H ⊗ X, column i has entries (√P_x)[j, i] at row j*k + x.
    let mut v_cols: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; ext]; d];
    for (x, elem) in p.elements().iter().enumerate() {
        let root = elem.psd_sqrt(crate::EIG_TOL)?;
        for (i, col) in v_cols.iter_mut().enumerate() {
            for j in 0..d {
                col[j * k + x] = root[(j, i)];
            }
        }
    }

    // Complete to a unitary: V's columns occupy positions i*k + x0 (x0 = 0);
    // the rest comes from orthonormalizing the standard-basis complement.
    let x0 = 0usize;
    let mut basis: Vec<Vec<Complex64>> = v_cols.clone();
    let mut completion: Vec<Vec<Complex64>> = Vec::new();
    for cand in 0..ext {
        if completion.len() + d == ext {
            break;
        }
        let mut v = vec![Complex64::ZERO; ext];
        v[cand] = Complex64::ONE;
        for b in basis.iter() {
            let ip: Complex64 = b.iter().zip(&v).map(|(a, c)| a.conj() * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= ip * bi;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            for vi in &mut v {
                *vi /= n;
            }
            basis.push(v.clone());
            completion.push(v);
        }
    }
    if completion.len() + d != ext {
        return Err(Error::NotPovm("unitary completion failed".into()));
    }

    let mut unitary = Matrix::zeros(ext, ext);
    let mut completion_iter = completion.into_iter();
    for col in 0..ext {
        let src: Vec<Complex64> = if col % k == x0 {
            v_cols[col / k].clone()
        } else {
            completion_iter.next().expect("enough completion columns")
        };
        for (row, z) in src.into_iter().enumerate() {
            unitary[(row, col)] = z;
        }
    }

    // P̃_x = U† (I ⊗ |x⟩⟨x|) U.
    let mut elements = Vec::with_capacity(k);
    for x in 0..k {
        let mut proj = Matrix::zeros(ext, ext);
        for j in 0..d {
            proj[(j * k + x, j * k + x)] = Complex64::ONE;
        }
        elements.push(unitary.dagger().mul(&proj).mul(&unitary));
    }
    let pvm = Pvm::new(elements)?;

    let mut embedding = Matrix::zeros(ext, d);
    for i in 0..d {
        embedding[(i * k + x0, i)] = Complex64::ONE;
    }

    Ok(NaimarkDilation {
        pvm,
        embedding,
        unitary,
        ancilla_dim: k,
    })
}

/// Wiesner-Breidbart measurement basis for one qubit: {𝔅|0^θ⟩, 𝔅|1^θ⟩}.
pub fn wb_basis(theta: u8) -> Pvm {
    let b0 = wiesner_breidbart_state(&[0], &[theta]).unwrap();
    let b1 = wiesner_breidbart_state(&[1], &[theta]).unwrap();
    Pvm::new(vec![b0.projector(), b1.projector()]).unwrap()
}

/// Conjugate-coding measurement basis for one qubit: {|0^θ⟩, |1^θ⟩}.
pub fn conjugate_basis(theta: u8) -> Pvm {
    let b0 = conjugate_state(&[0], &[theta]).unwrap();
    let b1 = conjugate_state(&[1], &[theta]).unwrap();
    Pvm::new(vec![b0.projector(), b1.projector()]).unwrap()
}

/// Per-qubit honest answer in the protocols: the state 𝔅|x^φ⟩ equals the
/// Wiesner-Breidbart state of sector s = (x, x ⊕ φ), whose optimal guess on
/// question θ is s_θ = x ⊕ (θ ∧ φ).
pub fn honest_answer(x: u8, phi: u8, theta: u8) -> u8 {
    x ^ (theta & phi)
}

/// Closed-form honest reply string y = x + 1^{J^c} ∧ θ ∧ φ.
pub fn honest_reply(x: &[u8], phi: &[u8], theta: &[u8], jc_mask: &[u8]) -> Vec<u8> {
    bits::xor(x, &bits::and(jc_mask, &bits::and(theta, phi)))
}
