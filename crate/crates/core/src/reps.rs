//! Approximate representations of Z₂^m and the constructive Gowers-Hatami
//! dilation, specialized to Abelian binary groups where every irreducible
//! character is the scalar γ_s(x) = (−1)^{x·s}.
//!
//! A group function f measures how far a family of unitaries is from a true
//! representation relative to a state |ψ⟩; the dilation turns it into an
//! exact representation on a space enlarged by one block per character, with
//! an intertwining error bounded by the measured defect.

use num_complex::Complex64;

use crate::matrix::{apply_to_factor, c64, Matrix, StateVector};
use crate::{Error, Result, DIM_CAP, TOL};

/// Element of Z₂^m under bitwise XOR; bit i is the coefficient of
/// generator i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub bits: u32,
    pub len: u8,
}

impl GroupElement {
    pub fn new(bits: u32, len: u8) -> Self {
        debug_assert!(len <= 31 && bits < (1 << len));
        GroupElement { bits, len }
    }

    pub fn identity(len: u8) -> Self {
        GroupElement { bits: 0, len }
    }

    pub fn compose(self, other: GroupElement) -> GroupElement {
        debug_assert_eq!(self.len, other.len);
        GroupElement {
            bits: self.bits ^ other.bits,
            len: self.len,
        }
    }

    pub fn bit(self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    /// The generator 1 in position i, 0 elsewhere.
    pub fn generator(i: usize, len: u8) -> Self {
        GroupElement { bits: 1 << i, len }
    }

    pub fn all(len: u8) -> impl Iterator<Item = GroupElement> {
        (0u32..(1 << len)).map(move |bits| GroupElement { bits, len })
    }
}

/// γ_s(x) = (−1)^{x·s}.
pub fn character(s: u32, x: u32) -> f64 {
    if (s & x).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// All 2^m characters of Z₂^m as a table: row s, column x.
pub fn character_table(m: u8) -> Vec<Vec<f64>> {
    let size = 1usize << m;
    (0..size)
        .map(|s| (0..size).map(|x| character(s as u32, x as u32)).collect())
        .collect()
}

/// Unitary-valued function on Z₂^m; values indexed by element bitmask.
#[derive(Debug, Clone)]
pub struct GroupFunction {
    m: u8,
    values: Vec<Matrix>,
}

impl GroupFunction {
    pub fn new(m: u8, values: Vec<Matrix>) -> Result<Self> {
        if values.len() != 1 << m {
            return Err(Error::DimensionMismatch(format!(
                "{} values for Z₂^{m}",
                values.len()
            )));
        }
        let d = values[0].rows();
        for (x, v) in values.iter().enumerate() {
            if v.rows() != d || v.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "value at {x} has wrong shape"
                )));
            }
            if !v.is_unitary(crate::EIG_TOL) {
                return Err(Error::InvalidParams(format!("value at {x} is not unitary")));
            }
        }
        Ok(GroupFunction { m, values })
    }

    /// f(x) = U_0^{x_0} U_1^{x_1} ··· built from self-inverse generators.
    pub fn from_generators(generators: &[Matrix]) -> Result<Self> {
        let m = generators.len() as u8;
        for g in generators {
            check_self_inverse(g)?;
        }
        let d = generators[0].rows();
        let mut values = Vec::with_capacity(1 << m);
        for x in GroupElement::all(m) {
            let mut acc = Matrix::identity(d);
            for (i, g) in generators.iter().enumerate() {
                if x.bit(i) == 1 {
                    acc = acc.mul(g);
                }
            }
            values.push(acc);
        }
        Ok(GroupFunction { m, values })
    }

    pub fn group_bits(&self) -> u8 {
        self.m
    }

    pub fn order(&self) -> usize {
        1 << self.m
    }

    pub fn dim(&self) -> usize {
        self.values[0].rows()
    }

    pub fn value(&self, x: GroupElement) -> &Matrix {
        &self.values[x.bits as usize]
    }

    pub fn value_at(&self, bits: u32) -> &Matrix {
        &self.values[bits as usize]
    }

    /// Replace one value; the result must stay unitary.
    pub fn with_value(mut self, x: GroupElement, v: Matrix) -> Result<Self> {
        if !v.is_unitary(crate::EIG_TOL) {
            return Err(Error::InvalidParams("replacement is not unitary".into()));
        }
        self.values[x.bits as usize] = v;
        Ok(self)
    }
}

fn check_self_inverse(u: &Matrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotSquare(u.rows(), u.cols()));
    }
    let defect = u
        .mul(u)
        .sub(&Matrix::identity(u.rows()))
        .max_abs()
        .max(if u.is_hermitian(TOL) { 0.0 } else { 1.0 });
    if defect > TOL {
        return Err(Error::NotSelfInverse(defect));
    }
    Ok(())
}

/// Fourier transform f̂(γ_s) = (1/|G|) Σ_x γ_s(x) f(x).
pub fn fourier_transform(f: &GroupFunction) -> Vec<Matrix> {
    let size = f.order();
    let d = f.dim();
    let norm = c64(1.0 / size as f64, 0.0);
    (0..size as u32)
        .map(|s| {
            let mut acc = Matrix::zeros(d, d);
            for x in 0..size as u32 {
                let sign = c64(character(s, x), 0.0);
                acc = acc.add(&f.value_at(x).scale(sign));
            }
            acc.scale(norm)
        })
        .collect()
}

/// Inverse transform f(x) = Σ_s γ_s(x) f̂(s); returns the raw values (they
/// need not be unitary if the input was not a transform of a group function).
pub fn inverse_fourier(fhat: &[Matrix], m: u8) -> Vec<Matrix> {
    let size = 1usize << m;
    assert_eq!(fhat.len(), size);
    let d = fhat[0].rows();
    (0..size as u32)
        .map(|x| {
            let mut acc = Matrix::zeros(d, d);
            for (s, block) in fhat.iter().enumerate() {
                acc = acc.add(&block.scale(c64(character(s as u32, x), 0.0)));
            }
            acc
        })
        .collect()
}

/// Multiplicativity defect of `f` relative to |ψ⟩ ∈ V ⊗ W, where `f` acts on
/// the first factor: max over y of sqrt(E_x ‖(f(x)f(y) − f(xy)) ⊗ I |ψ⟩‖²).
pub fn rep_defect(f: &GroupFunction, psi: &StateVector) -> Result<f64> {
    let d = f.dim();
    if !psi.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} not divisible by representation dimension {d}",
            psi.dim()
        )));
    }
    let w = psi.dim() / d;
    let dims = [d, w];
    let size = f.order();
    let applied: Vec<StateVector> = (0..size as u32)
        .map(|x| apply_to_factor(f.value_at(x), psi, &dims, 0))
        .collect();

    let mut worst = 0.0f64;
    for y in 0..size as u32 {
        let mut mean = 0.0;
        for x in 0..size as u32 {
            let lhs = apply_to_factor(f.value_at(x), &applied[y as usize], &dims, 0);
            let diff = lhs.sub(&applied[(x ^ y) as usize]);
            mean += diff.norm().powi(2);
        }
        mean /= size as f64;
        worst = worst.max(mean);
    }
    Ok(worst.sqrt())
}

/// A Z₂² group function generated by two self-inverse unitaries, with the
/// defect certificate ‖\[U₀,U₁\]|ψ⟩‖/√2.
#[derive(Debug, Clone)]
pub struct Z22Rep {
    pub f: GroupFunction,
    pub commutator_norm: f64,
    pub certified_defect: f64,
    pub measured_defect: f64,
}

/// Build f(00) = I, f(01) = U₀, f(10) = U₁, f(11) = U₀U₁ and certify its
/// defect from the state-relative commutator.
pub fn z22_from_commutator(u0: &Matrix, u1: &Matrix, psi: &StateVector) -> Result<Z22Rep> {
    check_self_inverse(u0)?;
    check_self_inverse(u1)?;
    let f = GroupFunction::from_generators(&[u0.clone(), u1.clone()])?;
    let d = f.dim();
    if !psi.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} not divisible by operator dimension {d}",
            psi.dim()
        )));
    }
    let w = psi.dim() / d;
    let comm = u0.mul(u1).sub(&u1.mul(u0));
    let commutator_norm = apply_to_factor(&comm, psi, &[d, w], 0).norm();
    let certified_defect = commutator_norm / std::f64::consts::SQRT_2;
    let measured_defect = rep_defect(&f, psi)?;
    debug_assert!(measured_defect <= certified_defect + TOL);
    Ok(Z22Rep {
        f,
        commutator_norm,
        certified_defect,
        measured_defect,
    })
}

/// A Z₂^m group function from a family U_1..U_m on one tensor factor, with
/// partner operators V_1..V_m on a disjoint factor supplying the swap
/// relation; certified defect m²(3ε + δ).
#[derive(Debug, Clone)]
pub struct Z2nRep {
    pub f: GroupFunction,
    /// max pairwise ‖[U_i, U_j]|ψ⟩‖.
    pub delta: f64,
    /// max ‖(U_i − V_i)|ψ⟩‖.
    pub eps: f64,
    pub certified_defect: f64,
    pub measured_defect: f64,
}

/// `us` act on factor 0 of `psi`, `vs` on factor 1; `psi_dims` lists the
/// factor dimensions of `psi` (at least two entries). The exact commutation
/// [U_i, V_j] = 0 holds structurally because the factors are disjoint.
pub fn z2n_family(
    us: &[Matrix],
    vs: &[Matrix],
    psi: &StateVector,
    psi_dims: &[usize],
) -> Result<Z2nRep> {
    if us.len() != vs.len() || us.is_empty() {
        return Err(Error::InvalidParams(
            "need equally many U and V operators".into(),
        ));
    }
    let total: usize = psi_dims.iter().product();
    if total != psi.dim() || psi_dims.len() < 2 {
        return Err(Error::DimensionMismatch(
            "psi_dims must factor the state with separate U and V factors".into(),
        ));
    }
    for u in us {
        check_self_inverse(u)?;
        if u.rows() != psi_dims[0] {
            return Err(Error::DimensionMismatch("U factor mismatch".into()));
        }
    }
    for v in vs {
        check_self_inverse(v)?;
        if v.rows() != psi_dims[1] {
            return Err(Error::DimensionMismatch("V factor mismatch".into()));
        }
    }

    let m = us.len();
    let mut delta = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            let comm = us[i].mul(&us[j]).sub(&us[j].mul(&us[i]));
            delta = delta.max(apply_to_factor(&comm, psi, psi_dims, 0).norm());
        }
    }
    let mut eps = 0.0f64;
    for (u, v) in us.iter().zip(vs) {
        let a = apply_to_factor(u, psi, psi_dims, 0);
        let b = apply_to_factor(v, psi, psi_dims, 1);
        eps = eps.max(a.sub(&b).norm());
    }

    let f = GroupFunction::from_generators(us)?;
    let certified_defect = (m * m) as f64 * (3.0 * eps + delta);
    // The defect definition acts on the first factor and is blind to how the
    // remainder splits, so the state can be passed through unchanged.
    let measured_defect = rep_defect(&f, psi)?;
    if measured_defect > certified_defect + TOL {
        return Err(Error::Precondition(format!(
            "measured defect {measured_defect:.3e} exceeds certificate {certified_defect:.3e}"
        )));
    }
    Ok(Z2nRep {
        f,
        delta,
        eps,
        certified_defect,
        measured_defect,
    })
}

/// Output of the Gowers-Hatami construction for Z₂^m: the dilated space is
/// one block of dimension d per character, ordered by character index, and
/// the representation acts on block s as the scalar γ_s(x).
#[derive(Debug, Clone)]
pub struct DilationResult {
    /// (d·2^m) × d isometry, block s of rows equal to f̂(γ_s).
    pub isometry: Matrix,
    pub group_bits: u8,
    pub block_dim: usize,
    /// Measured multiplicativity defect of the input function.
    pub defect: f64,
    /// max over x of the intertwining error ‖(V f(x) − g(x) V) ⊗ I |ψ⟩‖.
    pub max_intertwine_error: f64,
}

impl DilationResult {
    pub fn sector_count(&self) -> usize {
        1 << self.group_bits
    }

    pub fn dilated_dim(&self) -> usize {
        self.block_dim << self.group_bits
    }

    /// Projector onto the block of character s.
    pub fn sector_projector(&self, s: u32) -> Matrix {
        let dd = self.dilated_dim();
        let d = self.block_dim;
        let mut p = Matrix::zeros(dd, dd);
        let base = s as usize * d;
        for j in 0..d {
            p[(base + j, base + j)] = Complex64::ONE;
        }
        p
    }

    /// The exact representation g(x): γ_s(x) on block s.
    pub fn representation(&self, x: GroupElement) -> Matrix {
        let dd = self.dilated_dim();
        let d = self.block_dim;
        let mut g = Matrix::zeros(dd, dd);
        for s in 0..self.sector_count() {
            let val = c64(character(s as u32, x.bits), 0.0);
            for j in 0..d {
                g[(s * d + j, s * d + j)] = val;
            }
        }
        g
    }
}

/// Dilate an approximate representation into an exact one. `psi` lives on
/// V ⊗ W with the function acting on the first factor; the theorem guarantee
/// max_x ‖(V f(x) − g(x)V)|ψ⟩‖ ≤ defect is checked and recorded.
pub fn gowers_hatami_dilate(f: &GroupFunction, psi: &StateVector) -> Result<DilationResult> {
    let d = f.dim();
    let sectors = f.order();
    let dilated = d * sectors;
    if dilated > DIM_CAP {
        return Err(Error::DimensionCap(dilated, DIM_CAP));
    }
    if !psi.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} not divisible by representation dimension {d}",
            psi.dim()
        )));
    }
    let w = psi.dim() / d;

    let fhat = fourier_transform(f);
    let mut isometry = Matrix::zeros(dilated, d);
    for (s, block) in fhat.iter().enumerate() {
        for j in 0..d {
            for i in 0..d {
                isometry[(s * d + j, i)] = block[(j, i)];
            }
        }
    }
    let iso_defect = isometry
        .dagger()
        .mul(&isometry)
        .sub(&Matrix::identity(d))
        .max_abs();
    if iso_defect > crate::EIG_TOL {
        return Err(Error::Precondition(format!(
            "dilation isometry defect {iso_defect:.3e}"
        )));
    }

    let defect = rep_defect(f, psi)?;

    let mut result = DilationResult {
        isometry,
        group_bits: f.group_bits(),
        block_dim: d,
        defect,
        max_intertwine_error: 0.0,
    };

    let dims = [d, w];
    let mut max_err = 0.0f64;
    for x in GroupElement::all(f.group_bits()) {
        let vf = result.isometry.mul(f.value(x));
        let gv = result.representation(x).mul(&result.isometry);
        let a = apply_to_factor(&vf, psi, &dims, 0);
        let b = apply_to_factor(&gv, psi, &dims, 0);
        max_err = max_err.max(a.sub(&b).norm());
    }
    if max_err > defect + TOL {
        return Err(Error::Precondition(format!(
            "intertwining error {max_err:.3e} exceeds defect {defect:.3e}"
        )));
    }
    result.max_intertwine_error = max_err;
    Ok(result)
}
