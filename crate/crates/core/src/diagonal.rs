//! Diagonal states and diagonal projections on `M_d ⊗ M_d' ≅ B(C^d ⊗ C̄^d)`,
//! couplings of states and channels, and the coupling-inequality bounds.
//!
//! The commutant factor is the conjugate copy: `y' = I ⊗ conj(y)`. A coupling
//! of `φ` and the opposite state `ψ'` therefore has `tr₂ ρ̂ = ρ_φ` and
//! `tr₁ ρ̂ = ρ_ψᵀ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{KrausChannel, State};
use crate::random;
use crate::tensor::{
    column, conj, herm_eig, isometry_defect, kron, matrix_unit, max_abs_diff, outer, partial_trace, vec, ComplexMatrix,
    FactorShape,
};

const TOL_PROJECTION: f64 = 1e-9;
const TOL_DIAGONAL: f64 = 1e-9;
const TOL_MARGINAL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    SupportOfState,
    MaximalFromBasis,
    Custom,
}

/// An orthogonal projection on `C^d ⊗ C̄^d` with `p(x⊗I)p = p(I⊗xᵀ)p`.
#[derive(Debug, Clone)]
pub struct DiagonalProjection {
    p: ComplexMatrix,
    kind: ProjectionKind,
}

impl DiagonalProjection {
    /// Validates an arbitrary matrix as a diagonal projection.
    pub fn custom(p: ComplexMatrix) -> Result<Self> {
        if !is_diagonal_projection(&p)? {
            return Err(Error::NotAProjection(0.0));
        }
        Ok(Self { p, kind: ProjectionKind::Custom })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.p
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    /// System dimension `d` (the projection is `d² × d²`).
    pub fn dim(&self) -> usize {
        (self.p.nrows() as f64).sqrt().round() as usize
    }

    pub fn rank(&self) -> usize {
        self.p.trace().re.round() as usize
    }
}

/// A density on `C^d ⊗ C̄^d` with its two marginals `φ` and `ψ`
/// (`ψ` is stored directly; its opposite is what the second factor sees).
#[derive(Debug, Clone)]
pub struct CouplingState {
    rho_hat: ComplexMatrix,
    marginal_1: State,
    marginal_2: State,
}

impl CouplingState {
    pub fn new(rho_hat: ComplexMatrix) -> Result<Self> {
        let n = rho_hat.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::DimensionMismatch(format!("coupling density of side {n} is not d²")));
        }
        // validates positivity and normalization
        let joint = State::new(rho_hat)?;
        let shape = FactorShape::new([d, d])?;
        let m1 = partial_trace(joint.rho(), &shape, &[0])?;
        let m2 = partial_trace(joint.rho(), &shape, &[1])?.transpose();
        Ok(Self { rho_hat: joint.rho().clone(), marginal_1: State::new(m1)?, marginal_2: State::new(m2)? })
    }

    /// The product coupling `φ ⊗ ψ'`, density `ρ_φ ⊗ ρ_ψᵀ`.
    pub fn product(phi: &State, psi: &State) -> Result<Self> {
        if phi.dim() != psi.dim() {
            return Err(Error::DimensionMismatch("marginals of different dimension".into()));
        }
        Self::new(kron(phi.rho(), &psi.rho().transpose()))
    }

    pub fn rho_hat(&self) -> &ComplexMatrix {
        &self.rho_hat
    }

    pub fn marginal_1(&self) -> &State {
        &self.marginal_1
    }

    pub fn marginal_2(&self) -> &State {
        &self.marginal_2
    }

    pub fn dim(&self) -> usize {
        self.marginal_1.dim()
    }

    /// Largest deviation of the marginal conditions against `phi`, `psi`.
    pub fn marginal_residual(&self, phi: &State, psi: &State) -> Result<f64> {
        let d = self.dim();
        let shape = FactorShape::new([d, d])?;
        let m1 = partial_trace(&self.rho_hat, &shape, &[0])?;
        let m2 = partial_trace(&self.rho_hat, &shape, &[1])?;
        Ok(max_abs_diff(&m1, phi.rho()).max(max_abs_diff(&m2, &psi.rho().transpose())))
    }

    pub fn is_coupling_of(&self, phi: &State, psi: &State) -> Result<bool> {
        Ok(self.marginal_residual(phi, psi)? <= TOL_MARGINAL)
    }

    /// `φ̂(p) = tr(ρ̂ p)`.
    pub fn expect(&self, p: &ComplexMatrix) -> f64 {
        (&self.rho_hat * p).trace().re
    }
}

/// Standard GNS vector `ξ_φ = vec(ρ^{1/2}) = Σ √λᵢ eᵢ ⊗ conj(eᵢ)`.
pub fn gns_vector(s: &State) -> ComplexMatrix {
    vec(&s.sqrt_density())
}

/// The diagonal state `φ_Δ`, the vector state of `ξ_φ`.
pub fn diagonal_state(s: &State) -> CouplingState {
    CouplingState::new(outer(&gns_vector(s))).expect("GNS projection is a coupling")
}

/// Rank-one support projection of `φ_Δ`.
pub fn support_projection(s: &State) -> DiagonalProjection {
    let xi = gns_vector(s);
    DiagonalProjection { p: outer(&xi), kind: ProjectionKind::SupportOfState }
}

fn projection_defect(p: &ComplexMatrix) -> f64 {
    max_abs_diff(&(p * p), p).max(max_abs_diff(&p.adjoint(), p))
}

/// Whether `p(x ⊗ I)p = p(I ⊗ xᵀ)p` for every matrix unit `x`.
pub fn is_diagonal_projection(p: &ComplexMatrix) -> Result<bool> {
    let n = p.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if !p.is_square() || d * d != n {
        return Err(Error::DimensionMismatch(format!("projection of shape {:?} is not d² × d²", p.shape())));
    }
    let defect = projection_defect(p);
    if defect > TOL_PROJECTION {
        return Err(Error::NotAProjection(defect));
    }
    let id = ComplexMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            let x = matrix_unit(d, i, j);
            let left = p * kron(&x, &id) * p;
            let right = p * kron(&id, &x.transpose()) * p;
            if max_abs_diff(&left, &right) > TOL_DIAGONAL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `Σᵢ pᵢ ⊗ J pᵢ J`, the projection onto `span{eᵢ ⊗ conj(eᵢ)}`, for an
/// orthonormal basis given as columns.
pub fn maximal_diagonal_projection(basis: &ComplexMatrix) -> Result<DiagonalProjection> {
    if !basis.is_square() {
        return Err(Error::DimensionMismatch("basis must be a square matrix of columns".into()));
    }
    let defect = isometry_defect(basis);
    if defect > TOL_PROJECTION {
        return Err(Error::NotOrthonormal(defect));
    }
    let d = basis.nrows();
    let mut p = ComplexMatrix::zeros(d * d, d * d);
    for w in basis_pair_vectors(basis) {
        p += outer(&w);
    }
    Ok(DiagonalProjection { p, kind: ProjectionKind::MaximalFromBasis })
}

fn basis_pair_vectors(basis: &ComplexMatrix) -> Vec<ComplexMatrix> {
    (0..basis.ncols())
        .map(|i| {
            let e = column(basis, i);
            kron(&e, &conj(&e))
        })
        .collect()
}

/// The two forms of the quantum coupling inequality evaluated at the overlap
/// `v = φ̂(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QciBounds {
    pub overlap: f64,
    /// `4 (1 - v)^{1/2}`
    pub bound4: f64,
    /// `2 (1 + v^{1/2}) (1 - v)^{1/2}`
    pub refined: f64,
}

impl QciBounds {
    pub fn from_overlap(overlap: f64) -> Self {
        let v = overlap.clamp(0.0, 1.0);
        let gap = (1.0 - v).sqrt();
        Self { overlap: v, bound4: 4.0 * gap, refined: 2.0 * (1.0 + v.sqrt()) * gap }
    }
}

pub fn qci_bounds(c: &CouplingState, p: &DiagonalProjection) -> Result<QciBounds> {
    if p.matrix().shape() != c.rho_hat().shape() {
        return Err(Error::DimensionMismatch("projection and coupling differ in dimension".into()));
    }
    Ok(QciBounds::from_overlap(c.expect(p.matrix())))
}

/// Best overlap `φ̂(p_Δ)` found over maximal diagonal projections.
#[derive(Debug, Clone)]
pub struct OverlapOptimum {
    pub best: f64,
    /// Orthonormal basis (columns) attaining `best`.
    pub basis: ComplexMatrix,
    /// `true` for the exhaustive `d = 2` grid scan; otherwise `best` is only a
    /// lower bound on the maximum.
    pub exhaustive: bool,
}

fn overlap_for_basis(c: &CouplingState, basis: &ComplexMatrix) -> f64 {
    basis_pair_vectors(basis)
        .iter()
        .map(|w| (w.adjoint() * c.rho_hat() * w)[(0, 0)].re)
        .sum()
}

/// Maximizes `φ̂(p_Δ)` over maximal diagonal projections.
///
/// For `d = 2` the basis `{(√r, e^{iω}√t), (-e^{-iω}√t, √r)}` is scanned on a
/// grid with `resolution` points per axis (`r ∈ [0,1]`, `ω ∈ [0,2π)`, step
/// `1/(resolution-1)` of the range); grids nest whenever `resolution - 1`
/// divides the larger `resolution - 1`. For `d > 2` a seeded local ascent over
/// unitaries from 10 starts runs `resolution` steps each.
pub fn optimize_overlap(c: &CouplingState, resolution: usize) -> OverlapOptimum {
    optimize_overlap_seeded(c, resolution, 0)
}

pub fn optimize_overlap_seeded(c: &CouplingState, resolution: usize, seed: u64) -> OverlapOptimum {
    if c.dim() == 2 {
        scan_qubit_bases(c, resolution.max(2))
    } else {
        ascend_over_unitaries(c, resolution.max(1), seed)
    }
}

fn qubit_basis(r: f64, omega: f64) -> ComplexMatrix {
    let t = (1.0 - r).max(0.0);
    let phase = Complex64::from_polar(1.0, omega);
    let mut b = ComplexMatrix::zeros(2, 2);
    b[(0, 0)] = Complex64::new(r.sqrt(), 0.0);
    b[(1, 0)] = phase * t.sqrt();
    b[(0, 1)] = -phase.conj() * t.sqrt();
    b[(1, 1)] = Complex64::new(r.sqrt(), 0.0);
    b
}

fn scan_qubit_bases(c: &CouplingState, resolution: usize) -> OverlapOptimum {
    let steps = (resolution - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0.0, 0.0);
    for k in 0..resolution - 1 {
        let omega = std::f64::consts::TAU * k as f64 / steps;
        for j in 0..resolution {
            let r = j as f64 / steps;
            let v = overlap_for_basis(c, &qubit_basis(r, omega));
            if v > best {
                best = v;
                arg = (r, omega);
            }
        }
    }
    OverlapOptimum { best, basis: qubit_basis(arg.0, arg.1), exhaustive: true }
}

fn expi_hermitian(h: &ComplexMatrix, eps: f64) -> ComplexMatrix {
    let eig = herm_eig(h).expect("Hermitian generator");
    let d = h.nrows();
    let mut scaled = eig.vectors.clone();
    for (j, &l) in eig.values.iter().enumerate() {
        let z = Complex64::from_polar(1.0, eps * l);
        for i in 0..d {
            scaled[(i, j)] *= z;
        }
    }
    scaled * eig.vectors.adjoint()
}

fn ascend_over_unitaries(c: &CouplingState, steps: usize, seed: u64) -> OverlapOptimum {
    let d = c.dim();
    let mut rng = random::rng(seed);
    let mut best = f64::NEG_INFINITY;
    let mut best_basis = ComplexMatrix::identity(d, d);

    // the marginal eigenbases are natural extra starts
    let mut starts = vec![c.marginal_1().eigenvectors().clone(), conj(c.marginal_2().eigenvectors())];
    starts.extend((0..10).map(|_| random::random_unitary(&mut rng, d)));

    for start in starts {
        let mut u = start;
        let mut value = overlap_for_basis(c, &u);
        let mut eps = 0.5;
        for _ in 0..steps {
            let h = random::random_hermitian(&mut rng, d);
            let candidate = &u * expi_hermitian(&h, eps);
            let v = overlap_for_basis(c, &candidate);
            if v > value {
                value = v;
                u = candidate;
            } else {
                eps = (eps * 0.97).max(1e-6);
            }
        }
        if value > best {
            best = value;
            best_basis = u;
        }
    }
    OverlapOptimum { best, basis: best_basis, exhaustive: false }
}

/// Whether `hat` is a coupling of `base` with its opposite:
/// `hat(x ⊗ I) = base(x) ⊗ I` and `hat(I ⊗ conj(y)) = I ⊗ conj(base(y))`.
pub fn is_channel_coupling(hat: &KrausChannel, base: &KrausChannel) -> Result<bool> {
    is_channel_coupling_of(hat, base, base)
}

/// Whether `hat` restricts to `s` on `M ⊗ 1` and to the opposite of `t` on
/// `1 ⊗ M'`.
pub fn is_channel_coupling_of(hat: &KrausChannel, s: &KrausChannel, t: &KrausChannel) -> Result<bool> {
    Ok(channel_coupling_residual(hat, s, t)? <= TOL_MARGINAL)
}

pub fn channel_coupling_residual(hat: &KrausChannel, s: &KrausChannel, t: &KrausChannel) -> Result<f64> {
    let d = s.dim();
    if t.dim() != d || hat.dim() != d * d || hat.dim_out() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "coupling on M_{} for channels on M_{} and M_{}",
            hat.dim(),
            s.dim(),
            t.dim()
        )));
    }
    let id = ComplexMatrix::identity(d, d);
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            let x = matrix_unit(d, i, j);
            let left = hat.apply(&kron(&x, &id))?;
            worst = worst.max(max_abs_diff(&left, &kron(&s.apply(&x)?, &id)));
            let right = hat.apply(&kron(&id, &conj(&x)))?;
            worst = worst.max(max_abs_diff(&right, &kron(&id, &conj(&t.apply(&x)?))));
        }
    }
    Ok(worst)
}
