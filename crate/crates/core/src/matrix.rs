//! Dense complex linear algebra sized for desk-scale quantum simulation.
//!
//! Matrices are stored row-major in double precision. Dimensions stay in the
//! hundreds-to-few-thousands range, so everything here is a straightforward
//! dense algorithm; the Hermitian eigensolver is backed by nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shorthand for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Complex column vector; the substrate for pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from a row-major slice of (re, im) pairs; length must be rows*cols.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix {
            rows,
            cols,
            data: entries.to_vec(),
        })
    }

    /// Real-entry convenience constructor.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let complex: Vec<Complex64> = entries.iter().map(|&x| c64(x, 0.0)).collect();
        Matrix::from_rows(rows, cols, &complex)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector shape mismatch");
        let mut out = vec![Complex64::ZERO; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(&v.data).map(|(a, b)| a * b).sum();
        }
        StateVector { data: out }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        self.dagger()
            .mul(self)
            .sub(&Matrix::identity(self.rows))
            .max_abs()
            <= tol
    }

    /// V†V = I for a tall matrix.
    pub fn is_isometry(&self, tol: f64) -> bool {
        self.dagger()
            .mul(self)
            .sub(&Matrix::identity(self.cols))
            .max_abs()
            <= tol
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let (vals, _) = self.eig_hermitian_unchecked();
        vals.iter().all(|&v| v >= -tol)
    }

    pub fn is_density(&self, tol: f64) -> bool {
        self.is_square()
            && self.is_hermitian(tol)
            && (self.trace() - Complex64::ONE).norm() <= tol
            && self.is_psd(tol)
    }

    /// Kronecker product; `self` is the most significant factor.
    pub fn tensor(&self, other: &Matrix) -> Matrix {
        let (ra, ca, rb, cb) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Matrix::zeros(ra * rb, ca * cb);
        for ia in 0..ra {
            for ja in 0..ca {
                let a = self[(ia, ja)];
                if a == Complex64::ZERO {
                    continue;
                }
                for ib in 0..rb {
                    for jb in 0..cb {
                        out[(ia * rb + ib, ja * cb + jb)] = a * other[(ib, jb)];
                    }
                }
            }
        }
        out
    }

    /// Eigen-decomposition of a Hermitian matrix: eigenvalues sorted
    /// descending, near-degenerate pairs ordered lexicographically by their
    /// (phase-normalized) eigenvector entries so the output is reproducible.
    pub fn eig_hermitian(&self, tol: f64) -> Result<(Vec<f64>, Matrix)> {
        if !self.is_square() {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        if !self.is_hermitian(tol) {
            let mut worst = 0.0f64;
            for i in 0..self.rows {
                for j in i..self.cols {
                    worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
                }
            }
            return Err(Error::NotHermitian(worst));
        }
        Ok(self.eig_hermitian_unchecked())
    }

    fn eig_hermitian_unchecked(&self) -> (Vec<f64>, Matrix) {
        let n = self.rows;
        let na = DMatrix::from_fn(n, n, |i, j| self[(i, j)]);
        let mut se = nalgebra::SymmetricEigen::new(na);
        if se.eigenvalues.iter().any(|v| v.is_nan()) {
            // The QL iteration can fail to converge on highly structured
            // matrices. Conjugating by a fixed unitary keeps the spectrum
            // but breaks the structure; rotate the eigenvectors back after.
            let mut rng = sample::rng(0xD1A60);
            let q = sample::haar_unitary(n, &mut rng);
            let rotated = q.dagger().mul(self).mul(&q);
            let na2 = DMatrix::from_fn(n, n, |i, j| rotated[(i, j)]);
            se = nalgebra::SymmetricEigen::new(na2);
            assert!(
                se.eigenvalues.iter().all(|v| !v.is_nan()),
                "Hermitian eigensolver failed twice"
            );
            let rotated_vecs = Matrix::from_fn(n, n, |i, j| se.eigenvectors[(i, j)]);
            let back = q.mul(&rotated_vecs);
            for i in 0..n {
                for j in 0..n {
                    se.eigenvectors[(i, j)] = back[(i, j)];
                }
            }
        }

        let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
            .map(|k| {
                let col: Vec<Complex64> = (0..n).map(|i| se.eigenvectors[(i, k)]).collect();
                (se.eigenvalues[k], phase_normalize(col))
            })
            .collect();
        pairs.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then_with(|| lex_cmp(&a.1, &b.1))
        });

        let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut vecs = Matrix::zeros(n, n);
        for (k, (_, col)) in pairs.iter().enumerate() {
            for i in 0..n {
                vecs[(i, k)] = col[i];
            }
        }
        (vals, vecs)
    }

    /// Largest singular value. For normal matrices this equals the largest
    /// eigenvalue modulus; computed here as sqrt of the top eigenvalue of M†M.
    pub fn operator_norm(&self) -> f64 {
        let gram = self.dagger().mul(self);
        let (vals, _) = gram.eig_hermitian_unchecked();
        vals.first().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    /// Spectral square root of a PSD matrix; eigenvalues clamped at zero so
    /// numerical negativity of order the tolerance cannot leak complex entries.
    pub fn psd_sqrt(&self, tol: f64) -> Result<Matrix> {
        if !self.is_hermitian(tol) {
            return Err(Error::NotHermitian(tol));
        }
        let (vals, vecs) = self.eig_hermitian_unchecked();
        if let Some(&min) = vals.last() {
            if min < -tol {
                return Err(Error::NotDensity(format!(
                    "psd_sqrt of a matrix with eigenvalue {min:.3e}"
                )));
            }
        }
        let mut scaled = vecs.clone();
        for (k, &v) in vals.iter().enumerate() {
            let s = c64(v.max(0.0).sqrt(), 0.0);
            for i in 0..self.rows {
                scaled[(i, k)] *= s;
            }
        }
        Ok(scaled.mul(&vecs.dagger()))
    }

    /// Trace out every factor not listed in `keep`. `dims` are the tensor
    /// factor dimensions in order; their product must equal the matrix size.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        let total: usize = dims.iter().product();
        if total != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "factors {:?} do not multiply to matrix dimension {}",
                dims, self.rows
            )));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::IndexOutOfRange(format!(
                "keep set {:?} for {} factors",
                keep,
                dims.len()
            )));
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
        let strides = strides_of(dims);
        let kept_dims: Vec<usize> = keep.iter().map(|&f| dims[f]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&f| dims[f]).collect();
        let kd: usize = kept_dims.iter().product();

        // Flat offsets of every kept and traced multi-index in the full space.
        let kept_offsets = enumerate_offsets(
            &kept_dims,
            &keep.iter().map(|&f| strides[f]).collect::<Vec<_>>(),
        );
        let traced_offsets = enumerate_offsets(
            &traced_dims,
            &traced.iter().map(|&f| strides[f]).collect::<Vec<_>>(),
        );

        let mut out = Matrix::zeros(kd, kd);
        for (i, &ri) in kept_offsets.iter().enumerate() {
            for (j, &cj) in kept_offsets.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for &t in &traced_offsets {
                    acc += self.data[(ri + t) * self.cols + (cj + t)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// ½ Tr|r − s| for two density matrices of the same dimension.
pub fn trace_distance(r: &Matrix, s: &Matrix) -> Result<f64> {
    if r.rows() != s.rows() || r.cols() != s.cols() {
        return Err(Error::DimensionMismatch(format!(
            "trace_distance between {}x{} and {}x{}",
            r.rows(),
            r.cols(),
            s.rows(),
            s.cols()
        )));
    }
    for (name, m) in [("first", r), ("second", s)] {
        if !m.is_density(crate::EIG_TOL) {
            return Err(Error::NotDensity(format!("{name} argument")));
        }
    }
    let diff = r.sub(s);
    let (vals, _) = diff.eig_hermitian_unchecked();
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Apply `m` to tensor factor `which` of `v`, whose factor dimensions are
/// `dims`. The matrix may be rectangular; the factor dimension becomes
/// `m.rows()` in the result.
pub fn apply_to_factor(m: &Matrix, v: &StateVector, dims: &[usize], which: usize) -> StateVector {
    let total: usize = dims.iter().product();
    assert_eq!(total, v.dim(), "state does not match factor dimensions");
    assert_eq!(m.cols(), dims[which], "matrix does not match target factor");
    let left: usize = dims[..which].iter().product();
    let d = dims[which];
    let right: usize = dims[which + 1..].iter().product();
    let mut out = vec![Complex64::ZERO; left * m.rows() * right];
    for l in 0..left {
        for i in 0..m.rows() {
            let row = m.row(i);
            let out_base = (l * m.rows() + i) * right;
            for (j, &mij) in row.iter().enumerate().take(d) {
                if mij == Complex64::ZERO {
                    continue;
                }
                let in_base = (l * d + j) * right;
                for r in 0..right {
                    out[out_base + r] += mij * v.data[in_base + r];
                }
            }
        }
    }
    StateVector { data: out }
}

/// Reduced density matrix of a pure state: keep the listed factors, trace the
/// rest, without materializing the full projector.
pub fn reduced_density_matrix(v: &StateVector, dims: &[usize], keep: &[usize]) -> Result<Matrix> {
    let total: usize = dims.iter().product();
    if total != v.dim() {
        return Err(Error::DimensionMismatch(format!(
            "factors {:?} do not multiply to state dimension {}",
            dims,
            v.dim()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let perm: Vec<usize> = keep.iter().chain(traced.iter()).copied().collect();
    let reordered = v.permute(dims, &perm);
    let kd: usize = keep.iter().map(|&f| dims[f]).product();
    let td: usize = traced.iter().map(|&f| dims[f]).product();
    let mut out = Matrix::zeros(kd, kd);
    for i in 0..kd {
        for j in 0..kd {
            let mut acc = Complex64::ZERO;
            for t in 0..td {
                acc += reordered.data[i * td + t] * reordered.data[j * td + t].conj();
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

impl StateVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        StateVector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        StateVector {
            data: vec![Complex64::ZERO; dim],
        }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = StateVector::zeros(dim);
        v.data[index] = Complex64::ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        StateVector {
            data: entries.iter().map(|&x| c64(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, z: Complex64) {
        self.data[i] = z;
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩, conjugate-linear in self.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        assert_eq!(self.dim(), other.dim());
        StateVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        assert_eq!(self.dim(), other.dim());
        StateVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> StateVector {
        StateVector {
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        assert!(n > 1e-300, "cannot normalize the zero vector");
        self.scale(c64(1.0 / n, 0.0))
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        StateVector { data }
    }

    /// |self⟩⟨self| as a matrix.
    pub fn projector(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.data[i] * self.data[j].conj())
    }

    /// Global-phase convention: first amplitude of modulus above 1e-12 made
    /// real and positive.
    pub fn phase_normalized(&self) -> StateVector {
        StateVector {
            data: phase_normalize(self.data.clone()),
        }
    }

    /// Distance to `other` minimized over a global phase on `other`.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> f64 {
        let ip = self.inner(other);
        let phase = if ip.norm() > 1e-300 {
            ip.conj() / ip.norm()
        } else {
            Complex64::ONE
        };
        self.sub(&other.scale(phase)).norm()
    }

    /// Reorder tensor factors: output factor `j` is input factor `perm[j]`.
    pub fn permute(&self, dims: &[usize], perm: &[usize]) -> StateVector {
        let total: usize = dims.iter().product();
        assert_eq!(total, self.dim());
        assert_eq!(perm.len(), dims.len());
        let strides = strides_of(dims);
        let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let mut out = vec![Complex64::ZERO; total];
        let mut multi = vec![0usize; dims.len()];
        for (out_idx, slot) in out.iter_mut().enumerate() {
            // Decode out_idx in the permuted dims, map back to input offsets.
            let mut rem = out_idx;
            for (j, &nd) in new_dims.iter().enumerate().rev() {
                multi[j] = rem % nd;
                rem /= nd;
            }
            let mut src = 0usize;
            for (j, &p) in perm.iter().enumerate() {
                src += multi[j] * strides[p];
            }
            *slot = self.data[src];
        }
        StateVector { data: out }
    }
}

fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    strides
}

/// Flat offsets of every multi-index over `dims` with the given per-factor strides.
fn enumerate_offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let count: usize = dims.iter().product();
    let mut out = Vec::with_capacity(count);
    for mut idx in 0..count {
        let mut off = 0usize;
        for f in (0..dims.len()).rev() {
            off += (idx % dims[f]) * strides[f];
            idx /= dims[f];
        }
        out.push(off);
    }
    out
}

fn phase_normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12) {
        let phase = lead.conj() / lead.norm();
        for z in &mut v {
            *z *= phase;
        }
    }
    v
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x
            .re
            .partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
        {
            std::cmp::Ordering::Equal => continue,
            ord => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Seeded sampling of Haar-random objects; every randomized test and
/// experiment in the crate draws from here.
pub mod sample {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Deterministic RNG from a master seed.
    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Derive an independent stream for a trial index; results are then
    /// independent of worker scheduling.
    pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(master_seed);
        r.set_stream(trial.wrapping_add(1));
        r
    }

    fn gaussian_c64(rng: &mut impl Rng) -> Complex64 {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    /// Haar-random pure state.
    pub fn haar_state(dim: usize, rng: &mut impl Rng) -> StateVector {
        loop {
            let v = StateVector::new((0..dim).map(|_| gaussian_c64(rng)).collect());
            if v.norm() > 1e-6 {
                return v.normalized();
            }
        }
    }

    /// Haar-random unitary via QR of a Ginibre matrix with the phase fix on
    /// the R diagonal.
    pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Matrix {
        // Gram-Schmidt on Gaussian columns, with each diagonal pivot rotated
        // to a canonical phase.
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        while cols.len() < dim {
            let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian_c64(rng)).collect();
            for c in &cols {
                let ip: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= ip * ci;
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-8 {
                continue;
            }
            for vi in &mut v {
                *vi /= n;
            }
            cols.push(v);
        }
        Matrix::from_fn(dim, dim, |i, j| cols[j][i])
    }

    /// Random Hermitian matrix A + A† with Gaussian A.
    pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Matrix {
        let a = Matrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
        a.add(&a.dagger())
    }

    /// Random density matrix: Gaussian G, then GG†/Tr.
    pub fn random_density(dim: usize, rng: &mut impl Rng) -> Matrix {
        let g = Matrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
        let p = g.mul(&g.dagger());
        let t = p.trace().re;
        p.scale(c64(1.0 / t, 0.0))
    }
}

// Serde: complex entries as [re, im] pairs.

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        if r.entries.len() != r.rows * r.cols {
            return Err(serde::de::Error::custom("entry count does not match shape"));
        }
        Ok(Matrix {
            rows: r.rows,
            cols: r.cols,
            data: r.entries.iter().map(|&[re, im]| c64(re, im)).collect(),
        })
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<[f64; 2]> = self.data.iter().map(|z| [z.re, z.im]).collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(StateVector {
            data: entries.iter().map(|&[re, im]| c64(re, im)).collect(),
        })
    }
}
