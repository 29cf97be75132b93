//! Tensor dilations `Γ(x) = u*(x ⊗ 1)u` with a faithful environment state,
//! the Markov operator `T = (Id ⊗ ψ)∘Γ` they induce, and the diagonal
//! coupling of `T` with its opposite in Kraus form.
//!
//! Factor ordering is system-major: index `i·c + k` for system `i` and
//! environment `k`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{invariant_state, KrausChannel, State};
use crate::tensor::{
    basis_vector, commutator, conj, isometry_defect, kron, matrix_unit, numerical_rank, permute_factors, trace_norm,
    vec, ComplexMatrix, FactorShape,
};

/// Unitarity tolerance accepted by [`TensorDilation::new`].
pub const TOL_UNITARY: f64 = 1e-9;
/// Residual threshold of [`validate`].
pub const TOL_VALIDATION: f64 = 1e-8;
const TOL_INVARIANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TensorDilation {
    d: usize,
    c: usize,
    u: ComplexMatrix,
    psi: State,
    phi: Option<State>,
}

impl TensorDilation {
    /// Checks unitarity of `u`, faithfulness of `psi` and, when given, the
    /// invariance of `phi`.
    pub fn new(u: ComplexMatrix, psi: State, phi: Option<State>) -> Result<Self> {
        let dil = Self::new_unchecked(u, psi, phi)?;
        let defect = isometry_defect(&dil.u);
        if defect > TOL_UNITARY {
            return Err(Error::NotUnitary(defect));
        }
        if !dil.psi.is_faithful() {
            return Err(Error::InvalidState(format!(
                "environment state is not faithful (smallest eigenvalue {:.3e})",
                dil.psi.min_eigenvalue()
            )));
        }
        if let Some(phi) = &dil.phi {
            let residual = invariance_residual(&dil.induced_channel(), phi)?;
            if residual > TOL_INVARIANCE {
                return Err(Error::NotInvariant(residual));
            }
        }
        Ok(dil)
    }

    /// Only shapes are checked; use [`validate`] to obtain residuals.
    pub fn new_unchecked(u: ComplexMatrix, psi: State, phi: Option<State>) -> Result<Self> {
        let c = psi.dim();
        if !u.is_square() || u.nrows() % c != 0 || u.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "unitary of shape {:?} does not factor over an environment of dimension {c}",
                u.shape()
            )));
        }
        let d = u.nrows() / c;
        if let Some(phi) = &phi {
            if phi.dim() != d {
                return Err(Error::DimensionMismatch(format!("invariant state on M_{} for system M_{d}", phi.dim())));
            }
        }
        Ok(Self { d, c, u, psi, phi })
    }

    /// Accepts `u` with environment-major ordering (index `k·d + i`) and
    /// swaps the factors.
    pub fn from_environment_major(u_env: &ComplexMatrix, psi: State, phi: Option<State>) -> Result<Self> {
        let c = psi.dim();
        if u_env.nrows() % c != 0 || u_env.nrows() == 0 {
            return Err(Error::DimensionMismatch("unitary does not factor over the environment".into()));
        }
        let d = u_env.nrows() / c;
        let u = permute_factors(u_env, &FactorShape::new([c, d])?, &[1, 0])?;
        Self::new(u, psi, phi)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn psi(&self) -> &State {
        &self.psi
    }

    pub fn phi(&self) -> Option<&State> {
        self.phi.as_ref()
    }

    pub fn with_phi(mut self, phi: State) -> Result<Self> {
        if phi.dim() != self.d {
            return Err(Error::DimensionMismatch("invariant state of wrong dimension".into()));
        }
        self.phi = Some(phi);
        Ok(self)
    }

    /// `Γ(x) = u*(x ⊗ 1)u`.
    pub fn gamma(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let lifted = kron(x, &ComplexMatrix::identity(self.c, self.c));
        self.u.adjoint() * lifted * &self.u
    }

    /// `(I_d ⊗ ⟨f_m|) u (I_d ⊗ |f_k⟩)` for the eigenvectors `f` of `ρ_ψ`.
    pub fn block(&self, m: usize, k: usize) -> ComplexMatrix {
        let f = self.psi.eigenvectors();
        let id = ComplexMatrix::identity(self.d, self.d);
        let embed = |j: usize| kron(&id, &ComplexMatrix::from_fn(self.c, 1, |i, _| f[(i, j)]));
        embed(m).adjoint() * &self.u * embed(k)
    }

    /// `T(x) = Σ μ_k u[m,k]* x u[m,k]`, Kraus operators `√μ_k u[m,k]`.
    pub fn induced_channel(&self) -> KrausChannel {
        let mu = self.psi.eigenvalues();
        let mut kraus = Vec::with_capacity(self.c * self.c);
        for k in 0..self.c {
            for m in 0..self.c {
                kraus.push(self.block(m, k).scale(mu[k].sqrt()));
            }
        }
        KrausChannel::new_unchecked(kraus).expect("blocks share a shape")
    }

    /// Invariant state used for modular checks: the given `phi`, else the
    /// invariant state of `T` if it is faithful.
    pub fn modular_state(&self) -> Result<State> {
        if let Some(phi) = &self.phi {
            return Ok(phi.clone());
        }
        let inv = invariant_state(&self.induced_channel()).map_err(|e| Error::MissingInvariantState(e.to_string()))?;
        if !inv.state.is_faithful() {
            return Err(Error::MissingInvariantState(format!(
                "invariant state of T is not faithful (smallest eigenvalue {:.3e})",
                inv.state.min_eigenvalue()
            )));
        }
        Ok(inv.state)
    }
}

fn invariance_residual(t: &KrausChannel, phi: &State) -> Result<f64> {
    trace_norm(&(t.predual_apply(phi.rho())? - phi.rho()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSource {
    Given,
    Computed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// `‖u*u − I‖` (largest entry).
    pub unitarity_defect: f64,
    pub psi_min_eigenvalue: f64,
    /// `‖T_*(ρ_φ) − ρ_φ‖₁`
    pub invariance_residual: f64,
    /// `max_x ‖Γ([log ρ_φ, x]) − [log(ρ_φ ⊗ ρ_ψ), Γ(x)]‖` over matrix units.
    pub generator_residual: f64,
    /// `‖[u, ρ_φ ⊗ ρ_ψ]‖`, a sufficient condition only.
    pub commutant_residual: f64,
    pub phi_source: PhiSource,
    pub phi_eigenvalues: Vec<f64>,
    /// Unitarity, faithful `ψ`, invariance and the generator criterion.
    pub pass: bool,
    pub commutant_pass: bool,
}

pub fn validate(dil: &TensorDilation) -> Result<ValidationReport> {
    let unitarity_defect = isometry_defect(&dil.u);
    let psi_min_eigenvalue = dil.psi.min_eigenvalue();
    let phi_source = if dil.phi.is_some() { PhiSource::Given } else { PhiSource::Computed };
    let phi = dil.modular_state()?;
    if !phi.is_faithful() {
        return Err(Error::MissingInvariantState("invariant state is not faithful".into()));
    }
    let invariance_residual = invariance_residual(&dil.induced_channel(), &phi)?;

    // modular data of ψ exists only for faithful ψ
    let generator_residual = if dil.psi.is_faithful() { generator_residual(dil, &phi)? } else { f64::INFINITY };
    let joint = kron(phi.rho(), dil.psi.rho());
    let commutant_residual = commutator(&dil.u, &joint).norm();

    let pass = unitarity_defect <= TOL_VALIDATION
        && psi_min_eigenvalue > TOL_VALIDATION
        && invariance_residual <= TOL_VALIDATION
        && generator_residual <= TOL_VALIDATION;
    Ok(ValidationReport {
        unitarity_defect,
        psi_min_eigenvalue,
        invariance_residual,
        generator_residual,
        commutant_residual,
        phi_source,
        phi_eigenvalues: phi.eigenvalues().to_vec(),
        pass,
        commutant_pass: commutant_residual <= TOL_VALIDATION,
    })
}

fn generator_residual(dil: &TensorDilation, phi: &State) -> Result<f64> {
    let log_phi = phi.log_density()?;
    let log_joint = kron(&log_phi, &ComplexMatrix::identity(dil.c, dil.c))
        + kron(&ComplexMatrix::identity(dil.d, dil.d), &dil.psi.log_density()?);
    let mut worst = 0.0_f64;
    for i in 0..dil.d {
        for j in 0..dil.d {
            let x = matrix_unit(dil.d, i, j);
            let lhs = dil.gamma(&commutator(&log_phi, &x));
            let rhs = commutator(&log_joint, &dil.gamma(&x));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

pub fn induced_channel(dil: &TensorDilation) -> KrausChannel {
    dil.induced_channel()
}

/// `T′(y) = conj(T(conj(y)))`: Kraus operators conjugated entrywise.
pub fn opposite_channel(ch: &KrausChannel) -> KrausChannel {
    KrausChannel::new_unchecked(ch.kraus().iter().map(conj).collect()).expect("shapes preserved")
}

/// The diagonal coupling of `T` and `T′` on `M_d ⊗ M_d'`.
#[derive(Debug, Clone)]
pub struct DiagonalCoupling {
    channel: KrausChannel,
    /// `(m, n)` labels of each Kraus operator in the `ψ` eigenbasis.
    labels: Vec<(usize, usize)>,
    source: TensorDilation,
}

impl DiagonalCoupling {
    pub fn kraus(&self) -> &[ComplexMatrix] {
        self.channel.kraus()
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn labels(&self) -> &[(usize, usize)] {
        &self.labels
    }

    pub fn source(&self) -> &TensorDilation {
        &self.source
    }
}

/// `W_{mn} = Σ_k √μ_k u[m,k] ⊗ conj(u[n,k])`.
pub fn diagonal_coupling(dil: &TensorDilation) -> DiagonalCoupling {
    let c = dil.c;
    let mu = dil.psi.eigenvalues();
    let blocks: Vec<Vec<ComplexMatrix>> = (0..c).map(|m| (0..c).map(|k| dil.block(m, k)).collect()).collect();
    let conj_blocks: Vec<Vec<ComplexMatrix>> = blocks.iter().map(|row| row.iter().map(conj).collect()).collect();
    let dd = dil.d * dil.d;
    let mut kraus = Vec::with_capacity(c * c);
    let mut labels = Vec::with_capacity(c * c);
    for m in 0..c {
        for n in 0..c {
            let mut w = ComplexMatrix::zeros(dd, dd);
            for k in 0..c {
                w += kron(&blocks[m][k], &conj_blocks[n][k]).scale(mu[k].sqrt());
            }
            kraus.push(w);
            labels.push((m, n));
        }
    }
    let channel = KrausChannel::new_unchecked(kraus).expect("blocks share a shape");
    DiagonalCoupling { channel, labels, source: dil.clone() }
}

/// `Σ_k λ_k (S_k ⊗ T_k′)`, Kraus operators `√λ_k A ⊗ conj(B)`.
pub fn coupling_from_convex(parts: &[(f64, KrausChannel, KrausChannel)]) -> Result<KrausChannel> {
    let first = parts.first().ok_or_else(|| Error::InvalidWeights("no components".into()))?;
    let (d_s, d_t) = (first.1.dim(), first.2.dim());
    let mut total = 0.0;
    for (w, s, t) in parts {
        if !w.is_finite() || *w < -1e-12 {
            return Err(Error::InvalidWeights(format!("weight {w} is negative")));
        }
        if s.dim() != d_s || t.dim() != d_t {
            return Err(Error::DimensionMismatch("components act on different algebras".into()));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let mut kraus = Vec::new();
    for (w, s, t) in parts {
        if *w <= 0.0 {
            continue;
        }
        for a in s.kraus() {
            for b in t.kraus() {
                kraus.push(kron(a, &conj(b)).scale(w.sqrt()));
            }
        }
    }
    KrausChannel::new(kraus)
}

/// Divides by the phase of the largest-modulus entry (first in row-major
/// order among entries within `1e-12` of the maximum).
pub fn normalize_phase(m: &ComplexMatrix) -> ComplexMatrix {
    let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return m.clone();
    }
    let mut pivot = Complex64::new(1.0, 0.0);
    'outer: for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)].norm() >= max - 1e-12 {
                pivot = m[(i, j)] / m[(i, j)].norm();
                break 'outer;
            }
        }
    }
    m.map(|z| z / pivot)
}

/// Dimension of `span{K_i* K_j}`; it equals the squared Kraus rank exactly
/// for extremal channels.
pub fn extremality_rank(kraus: &[ComplexMatrix]) -> usize {
    let Some(first) = kraus.first() else { return 0 };
    let n = first.ncols() * first.ncols();
    let mut rows = ComplexMatrix::zeros(kraus.len() * kraus.len(), n);
    let mut r = 0;
    for a in kraus {
        for b in kraus {
            let v = vec(&(a.adjoint() * b));
            for j in 0..n {
                rows[(r, j)] = v[(j, 0)];
            }
            r += 1;
        }
    }
    numerical_rank(&rows, 1e-9)
}

/// Restriction of `T` to diagonal matrices: `P[i][j] = ⟨e_i, T(e_jj) e_i⟩`.
pub fn diagonal_restriction(ch: &KrausChannel) -> Vec<Vec<f64>> {
    let d = ch.dim();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let e = basis_vector(d, j);
                    ch.apply(&(&e * e.adjoint())).expect("square")[(i, i)].re
                })
                .collect()
        })
        .collect()
}
