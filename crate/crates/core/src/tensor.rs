//! Dense complex linear algebra on tensor products of matrix algebras.
//!
//! Vectorization is row-major: `vec(A)[i*cols + j] = A[i, j]`. With this
//! convention the standard representation of `M_d` on `C^d ⊗ C^d` reads
//!
//! * `(x ⊗ I) vec(A) = vec(x A)` (left multiplication),
//! * `(I ⊗ conj(y)) vec(A) = vec(A y*)` (the commutant),
//! * `J vec(A) = vec(A*)`, so `J x J = I ⊗ conj(x)` and `J x* J = I ⊗ xᵀ`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix. Vectors are `n × 1` matrices.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const TOL_HERM: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a complex matrix from real row slices.
pub fn real_matrix(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    ComplexMatrix::from_fn(r, c, |i, j| c64(rows[i][j], 0.0))
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { ZERO })
}

/// The matrix unit `e_ij` of size `n × n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// Standard basis vector of `C^n`.
pub fn basis_vector(n: usize, i: usize) -> ComplexMatrix {
    let mut v = ComplexMatrix::zeros(n, 1);
    v[(i, 0)] = ONE;
    v
}

/// Column `j` as an `n × 1` matrix.
pub fn column(m: &ComplexMatrix, j: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(m.nrows(), 1, m.column(j).as_slice())
}

pub fn conj(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

/// `|v⟩⟨v|` for a column vector.
pub fn outer(v: &ComplexMatrix) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Commutator `ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Kronecker product; `kron(a,b)[(i*rb + k, j*cb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Ordered factor dimensions of a tensor product space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorShape {
    dims: Vec<usize>,
}

impl FactorShape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::DimensionMismatch(format!("invalid factor dims {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat index map `old -> new` when factor `j` of the new ordering is
    /// factor `perm[j]` of the old one.
    fn permutation_map(&self, perm: &[usize]) -> Result<Vec<usize>> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::DimensionMismatch(format!(
                "{perm:?} is not a permutation of {n} factors"
            )));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let new_strides = FactorShape { dims: new_dims }.strides();
        let old_strides = self.strides();
        let total = self.total();
        let mut map = vec![0; total];
        for (old, slot) in map.iter_mut().enumerate() {
            let mut new = 0;
            for (j, &p) in perm.iter().enumerate() {
                let digit = (old / old_strides[p]) % self.dims[p];
                new += digit * new_strides[j];
            }
            *slot = new;
        }
        Ok(map)
    }

    fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        let n = self.total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} does not match factor shape {:?}",
                m.nrows(),
                m.ncols(),
                self.dims
            )));
        }
        Ok(())
    }
}

/// Inverse of a permutation.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    inv
}

/// Conjugates `m` by the unitary reordering tensor factors. Factor `j` of the
/// result is factor `perm[j]` of the input.
pub fn permute_factors(m: &ComplexMatrix, shape: &FactorShape, perm: &[usize]) -> Result<ComplexMatrix> {
    shape.check_square(m)?;
    let map = shape.permutation_map(perm)?;
    let n = shape.total();
    let mut out = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Reorders the tensor factors of a column vector.
pub fn permute_vector(v: &ComplexMatrix, shape: &FactorShape, perm: &[usize]) -> Result<ComplexMatrix> {
    if v.nrows() != shape.total() || v.ncols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} does not match factor shape {:?}",
            v.nrows(),
            shape.dims
        )));
    }
    let map = shape.permutation_map(perm)?;
    let mut out = ComplexMatrix::zeros(v.nrows(), 1);
    for (r, &new) in map.iter().enumerate() {
        out[(new, 0)] = v[(r, 0)];
    }
    Ok(out)
}

/// Traces out every factor not listed in `keep`. Kept factors retain their
/// relative order.
pub fn partial_trace(m: &ComplexMatrix, shape: &FactorShape, keep: &[usize]) -> Result<ComplexMatrix> {
    shape.check_square(m)?;
    let nf = shape.dims.len();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.iter().any(|&k| k >= nf) {
        return Err(Error::DimensionMismatch(format!("invalid kept factors {keep:?}")));
    }
    let traced: Vec<usize> = (0..nf).filter(|k| !keep.contains(k)).collect();
    let strides = shape.strides();

    let offsets = |factors: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(offs.len() * shape.dims[f]);
            for &o in &offs {
                for digit in 0..shape.dims[f] {
                    next.push(o + digit * strides[f]);
                }
            }
            offs = next;
        }
        offs
    };
    let kept_offsets = offsets(&keep);
    let traced_offsets = offsets(&traced);

    let k = kept_offsets.len();
    let mut out = ComplexMatrix::zeros(k, k);
    for (a, &ra) in kept_offsets.iter().enumerate() {
        for (b, &cb) in kept_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += m[(ra + t, cb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Relative deviation from Hermiticity, `‖m - m*‖ / ‖m‖` (Frobenius).
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / scale
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("eigendecomposition of {}x{}", m.nrows(), m.ncols())));
    }
    let defect = hermiticity_defect(m);
    if defect > TOL_HERM {
        return Err(Error::NotHermitian(defect));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("trace norm of {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.clone().singular_values().iter().sum())
}

/// `rho^alpha` for a positive semidefinite `rho`. Eigenvalues below a
/// relative `1e-12` are treated as zero, so `alpha = 0` yields the range
/// projection.
pub fn frac_power(rho: &ComplexMatrix, alpha: f64) -> Result<ComplexMatrix> {
    let eig = herm_eig(rho)?;
    let scale = eig.values.iter().fold(0.0_f64, |acc, l| acc.max(l.abs())).max(f64::MIN_POSITIVE);
    if eig.min() < -1e-10 * scale.max(1.0) {
        return Err(Error::NotPsd(eig.min()));
    }
    let zero_tol = 1e-12 * scale;
    if alpha < 0.0 && eig.min() <= zero_tol {
        return Err(Error::SingularNegativePower);
    }
    Ok(eig.reconstruct_with(|l| if l <= zero_tol { 0.0 } else { l.powf(alpha) }))
}

/// Matrix logarithm of a positive definite matrix.
pub fn log_pd(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(rho)?;
    if eig.min() <= 0.0 {
        return Err(Error::SingularNegativePower);
    }
    Ok(eig.reconstruct_with(f64::ln))
}

/// Row-major vectorization into a column.
pub fn vec(a: &ComplexMatrix) -> ComplexMatrix {
    let (r, c) = a.shape();
    ComplexMatrix::from_fn(r * c, 1, |k, _| a[(k / c, k % c)])
}

pub fn unvec(v: &ComplexMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.ncols() != 1 || v.nrows() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape {}x{} into {rows}x{cols}",
            v.nrows(),
            v.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| v[(i * cols + j, 0)]))
}

/// Reshapes a vector of perfect-square length `d²` into a `d × d` matrix.
pub fn unvec_square(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = v.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::DimensionMismatch(format!("length {n} is not a perfect square")));
    }
    unvec(v, d, d)
}

/// The modular conjugation `J vec(A) = vec(A*)` of the standard
/// representation of a full matrix algebra.
pub fn modular_conjugation(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(vec(&unvec_square(v)?.adjoint()))
}

/// Number of singular values above `tol * σ_max`.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Maximum deviation of `v* v` from the identity.
pub fn isometry_defect(v: &ComplexMatrix) -> f64 {
    let gram = v.adjoint() * v;
    max_abs_diff(&gram, &ComplexMatrix::identity(v.ncols(), v.ncols()))
}
