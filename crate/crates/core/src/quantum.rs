//! States, Heisenberg-picture Kraus channels and their linear-map views.

use nalgebra::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::random;
use crate::tensor::{
    all_finite, column, herm_eig, hermitian_part, hermiticity_defect, kron, matrix_unit, max_abs_diff, outer,
    trace_norm, unvec, unvec_square, vec, ComplexMatrix, TOL_HERM,
};

/// Unitality tolerance for Kraus channels.
pub const TOL_UNITAL: f64 = 1e-9;
/// Distance to 1 below which an eigenvalue of a transfer matrix counts as 1
/// when extracting invariant states.
pub const TOL_EIGEN_ONE: f64 = 1e-6;
/// Eigenvalue-1 window for fixed-space dimensions.
pub const TOL_FIXED_SPACE: f64 = 1e-7;
/// Largest superoperator side length `n²` that is materialized densely.
pub const MATERIALIZE_MAX: usize = 1296;

const TOL_STATE: f64 = 1e-10;

/// A density matrix together with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct State {
    rho: ComplexMatrix,
    /// Eigenvalues in descending order, clamped at zero.
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, columns ordered like `eigenvalues`.
    eigenvectors: ComplexMatrix,
}

impl State {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::InvalidState(format!("density must be square, got {}x{}", rho.nrows(), rho.ncols())));
        }
        if !all_finite(&rho) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let defect = hermiticity_defect(&rho);
        if defect > TOL_HERM {
            return Err(Error::NotHermitian(defect));
        }
        let rho = hermitian_part(&rho);
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TOL_STATE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = herm_eig(&rho)?;
        if eig.min() < -TOL_STATE {
            return Err(Error::NotPsd(eig.min()));
        }
        let n = rho.nrows();
        let eigenvalues = eig.values.iter().rev().map(|&l| l.max(0.0)).collect();
        let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, n - 1 - j)]);
        Ok(Self { rho, eigenvalues, eigenvectors })
    }

    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        Self::new(crate::tensor::diag_real(weights))
    }

    /// Vector state of a (not necessarily normalized) vector.
    pub fn pure(v: &ComplexMatrix) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(outer(&v.unscale(n)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(ComplexMatrix::identity(d, d).unscale(d as f64)).expect("valid state")
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty")
    }

    pub fn is_faithful(&self) -> bool {
        self.min_eigenvalue() > TOL_STATE
    }

    /// `φ(x) = tr(ρ x)`.
    pub fn expect(&self, x: &ComplexMatrix) -> Complex64 {
        (&self.rho * x).trace()
    }

    /// `ρ^alpha` through the cached spectral decomposition. Negative powers
    /// require a faithful state.
    pub fn power(&self, alpha: f64) -> Result<ComplexMatrix> {
        if alpha < 0.0 && !self.is_faithful() {
            return Err(Error::SingularNegativePower);
        }
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let s = if l <= 0.0 { 0.0 } else { l.powf(alpha) };
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        Ok(scaled * self.eigenvectors.adjoint())
    }

    pub fn sqrt_density(&self) -> ComplexMatrix {
        self.power(0.5).expect("non-negative power")
    }

    /// `log ρ` for a faithful state.
    pub fn log_density(&self) -> Result<ComplexMatrix> {
        if !self.is_faithful() {
            return Err(Error::SingularNegativePower);
        }
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= l.ln();
            }
        }
        Ok(scaled * self.eigenvectors.adjoint())
    }

    pub fn tensor(&self, other: &State) -> State {
        State::new(kron(&self.rho, &other.rho)).expect("product of states is a state")
    }
}

/// Trace-norm distance `‖ρ_a - ρ_b‖₁`.
pub fn state_distance(a: &State, b: &State) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("states of dimension {} and {}", a.dim(), b.dim())));
    }
    trace_norm(&(a.rho() - b.rho()))
}

/// A unital completely positive map in the Heisenberg picture,
/// `T(x) = Σ K* x K`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Builds a channel and checks `Σ K* K = I`. Each operator maps
    /// `C^dim_in` into `C^dim_out`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::new_unchecked(kraus)?;
        let defect = ch.unitality_defect();
        if defect > TOL_UNITAL {
            return Err(Error::NotUnital(defect));
        }
        Ok(ch)
    }

    /// Builds the map without the unitality check; shapes are still validated.
    pub fn new_unchecked(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        if kraus.iter().any(|k| !all_finite(k)) {
            return Err(Error::DimensionMismatch("non-finite Kraus entry".into()));
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self { dim_in: d, dim_out: d, kraus: vec![ComplexMatrix::identity(d, d)] }
    }

    /// `x ↦ u* x u`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        Self::new(vec![u.clone()])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Dimension of a channel acting on a single matrix algebra.
    pub fn dim(&self) -> usize {
        self.dim_in
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn unitality_defect(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &ComplexMatrix::identity(self.dim_in, self.dim_in))
    }

    /// Heisenberg action `Σ K* x K`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::DimensionMismatch(format!(
                "channel on M_{} applied to {}x{}",
                self.dim_out,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc += k.adjoint() * (x * k);
        }
        acc
    }

    /// Schrödinger action `Σ K ρ K*`.
    pub fn predual_apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "predual on M_{} applied to {}x{}",
                self.dim_in,
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(self.predual_unchecked(rho))
    }

    pub(crate) fn predual_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            acc += k * (rho * k.adjoint());
        }
        acc
    }

    /// Matrix of `x ↦ Σ K* x K` in the row-major vec basis.
    pub fn transfer_matrix(&self) -> Superoperator {
        let n_in = self.dim_in;
        let n_out = self.dim_out;
        let mut m = ComplexMatrix::zeros(n_in * n_in, n_out * n_out);
        for k in &self.kraus {
            m += kron(&k.adjoint(), &k.transpose());
        }
        Superoperator { matrix: m, dim: n_in }
    }

    /// Matrix of the predual `ρ ↦ Σ K ρ K*` in the row-major vec basis.
    pub fn predual_matrix(&self) -> ComplexMatrix {
        let n_in = self.dim_in;
        let n_out = self.dim_out;
        let mut m = ComplexMatrix::zeros(n_out * n_out, n_in * n_in);
        for k in &self.kraus {
            m += kron(k, &crate::tensor::conj(k));
        }
        m
    }

    /// Tensor product channel with Kraus operators `A ⊗ B`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        KrausChannel {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
        }
    }

    /// Transfer-matrix distance to another channel (max entry deviation).
    pub fn distance(&self, other: &KrausChannel) -> f64 {
        max_abs_diff(&self.transfer_matrix().matrix, &other.transfer_matrix().matrix)
    }
}

/// A linear map on `M_n` represented by its `n² × n²` matrix acting on
/// row-major vectorizations.
#[derive(Debug, Clone)]
pub struct Superoperator {
    matrix: ComplexMatrix,
    dim: usize,
}

impl Superoperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("superoperator must be square".into()));
        }
        let n = matrix.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::DimensionMismatch(format!("side {n} is not a perfect square")));
        }
        Ok(Self { matrix, dim: d })
    }

    /// Materializes a linear map on `M_d` by evaluating it on matrix units.
    pub fn from_fn(d: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let mut matrix = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let image = vec(&f(&matrix_unit(d, i, j)));
                matrix.set_column(i * d + j, &image.column(0));
            }
        }
        Self { matrix, dim: d }
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d * d, d * d), dim: d }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch("argument does not match superoperator".into()));
        }
        unvec(&(&self.matrix * vec(x)), self.dim, self.dim)
    }

    /// Choi matrix `Σ e_ij ⊗ Φ(e_ij)`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut c = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let col = column(&self.matrix, i * d + j);
                let image = unvec(&col, d, d).expect("square");
                for k in 0..d {
                    for l in 0..d {
                        c[(i * d + k, j * d + l)] = image[(k, l)];
                    }
                }
            }
        }
        c
    }

    /// Complete positivity via the Choi matrix, eigenvalue tolerance `-1e-9`.
    pub fn is_completely_positive(&self) -> bool {
        match herm_eig(&self.choi()) {
            Ok(e) => e.min() >= -1e-9,
            Err(_) => false,
        }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        eigenvalues(&self.matrix)
    }

    pub fn subdominant_modulus(&self) -> f64 {
        subdominant_modulus(&self.matrix)
    }

    /// Dimension of the eigenvalue-1 eigenspace (window `1e-7`).
    pub fn fixed_space_dim(&self) -> usize {
        count_near_one(&self.eigenvalues(), TOL_FIXED_SPACE)
    }
}

/// Eigenvalues of a general square matrix via the complex Schur form.
///
/// Shifted QR can stall on highly structured inputs (many eigenvalues of
/// equal modulus); on a stall the matrix is rotated by a seeded unitary
/// similarity, which preserves the spectrum, and the iteration restarted.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    let diagonal = |t: ComplexMatrix| (0..n).map(|i| t[(i, i)]).collect::<Vec<_>>();
    let max_niter = 200 * n.max(1);
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, max_niter) {
        return diagonal(s.unpack().1);
    }
    for seed in 0..SCHUR_RESTARTS {
        let q = random::random_unitary(&mut random::rng(seed), n);
        let rotated = q.adjoint() * m * &q;
        if let Some(s) = Schur::try_new(rotated, f64::EPSILON, max_niter) {
            return diagonal(s.unpack().1);
        }
    }
    let q = random::random_unitary(&mut random::rng(SCHUR_RESTARTS), n);
    diagonal(Schur::new(q.adjoint() * m * &q).unpack().1)
}

const SCHUR_RESTARTS: u64 = 8;

pub fn count_near_one(eigs: &[Complex64], tol: f64) -> usize {
    eigs.iter().filter(|l| (*l - Complex64::new(1.0, 0.0)).norm() <= tol).count()
}

/// Largest modulus among the eigenvalues after removing the one closest
/// to 1.
pub fn subdominant_modulus(m: &ComplexMatrix) -> f64 {
    let mut eigs = eigenvalues(m);
    if eigs.len() <= 1 {
        return 0.0;
    }
    let one = Complex64::new(1.0, 0.0);
    let closest = eigs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - one).norm().total_cmp(&(b.1 - one).norm()))
        .map(|(i, _)| i)
        .expect("nonempty");
    eigs.swap_remove(closest);
    eigs.iter().map(|l| l.norm()).fold(0.0, f64::max)
}

/// Fixed density of a unital channel's predual.
#[derive(Debug, Clone)]
pub struct InvariantState {
    pub state: State,
    /// Dimension of the predual's eigenvalue-1 eigenspace.
    pub fixed_dim: usize,
}

impl InvariantState {
    pub fn is_unique(&self) -> bool {
        self.fixed_dim == 1
    }
}

/// Invariant state of a unital channel. The maximally mixed state is mapped
/// by the spectral projection onto the predual's eigenvalue-1 eigenspace;
/// for a unique fixed point this is the normalized Perron eigenvector.
pub fn invariant_state(ch: &KrausChannel) -> Result<InvariantState> {
    let d = ch.dim();
    if ch.dim_in != ch.dim_out {
        return Err(Error::DimensionMismatch("invariant state of a non-square channel".into()));
    }
    let p = ch.predual_matrix();
    let n = p.nrows();
    let k = count_near_one(&eigenvalues(&p), TOL_EIGEN_ONE);
    if k == 0 {
        return Err(Error::Numerical(format!("no eigenvalue within {TOL_EIGEN_ONE:e} of 1")));
    }
    let shifted = &p - ComplexMatrix::identity(n, n);
    let svd = shifted.svd(true, true);
    let u = svd.u.as_ref().expect("computed");
    let v_t = svd.v_t.as_ref().expect("computed");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let null = &order[..k];
    let right = ComplexMatrix::from_fn(n, k, |i, j| v_t[(null[j], i)].conj());
    let left = ComplexMatrix::from_fn(n, k, |i, j| u[(i, null[j])]);
    let gram = left.adjoint() * &right;
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvalue 1 is not semisimple".into()))?;
    let start = vec(&ComplexMatrix::identity(d, d).unscale(d as f64));
    let fixed = right * (gram_inv * (left.adjoint() * start));
    let rho = hermitian_part(&unvec_square(&fixed)?);
    let tr = rho.trace().re;
    if tr.abs() < 1e-8 {
        return Err(Error::Numerical("fixed point has vanishing trace".into()));
    }
    let state = State::new(rho.unscale(tr))?;
    Ok(InvariantState { state, fixed_dim: k })
}

/// Fixed-space dimension of a channel's Heisenberg action. Dense eigensolve
/// when `n² ≤ 1296`, subspace iteration on the Kraus action otherwise.
pub fn channel_fixed_space_dim(ch: &KrausChannel) -> usize {
    let n = ch.dim();
    if n * n <= MATERIALIZE_MAX {
        ch.transfer_matrix().fixed_space_dim()
    } else {
        iterative_fixed_space_dim(ch, 0)
    }
}

/// Subspace iteration with Rayleigh-Ritz extraction. The block grows until it
/// holds strictly more vectors than there are eigenvalues on the unit circle.
pub fn iterative_fixed_space_dim(ch: &KrausChannel, seed: u64) -> usize {
    let d = ch.dim();
    let n = d * d;
    let mut rng = random::rng(seed);
    let apply = |q: &ComplexMatrix| -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(n, q.ncols());
        for j in 0..q.ncols() {
            let x = unvec(&column(&q, j), d, d).expect("shape");
            out.set_column(j, &vec(&ch.apply_unchecked(&x)).column(0));
        }
        out
    };
    let orth = |m: ComplexMatrix| -> ComplexMatrix { m.qr().q() };

    let mut block = 4.min(n);
    loop {
        let mut q = orth(random::random_matrix(&mut rng, n, block));
        let mut previous = usize::MAX;
        for iter in 1..=4000 {
            q = orth(apply(&q));
            if iter % 25 != 0 {
                continue;
            }
            let aq = apply(&q);
            let h = q.adjoint() * &aq;
            let ritz = eigenvalues(&h);
            let near_one = count_near_one(&ritz, TOL_FIXED_SPACE);
            let peripheral = ritz.iter().filter(|l| l.norm() > 1.0 - 1e-4).count();
            let residual = (&aq - &q * &h).norm();
            if peripheral == block && block < n {
                break;
            }
            if near_one == previous && residual < 1e-9 {
                return near_one;
            }
            previous = near_one;
            if iter == 4000 {
                return near_one;
            }
        }
        if block >= n {
            return previous.min(n);
        }
        block = (block * 2).min(n);
    }
}
