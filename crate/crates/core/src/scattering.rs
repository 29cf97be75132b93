//! Scattering data of a tensor dilation: the isometry `v`, the extended dual
//! transition operator `Z′(t) = v*(t ⊗ 1)v`, asymptotic completeness, the
//! `Φ_α` duality with the diagonal coupling, and mixing certificates built
//! from the iterates `T̂_Δⁿ(p_Δ)`.
//!
//! `L²(M_d)` is realized as `C^d ⊗ C̄^d` with `ξ_φ = vec(ρ_φ^{1/2})`.

use serde::Serialize;

use crate::diagonal::{gns_vector, support_projection};
use crate::dilation::{diagonal_coupling, TensorDilation};
use crate::error::{Error, Result};
use crate::quantum::{channel_fixed_space_dim, KrausChannel, State, Superoperator, MATERIALIZE_MAX};
use crate::random;
use crate::tensor::{
    c64, conj, herm_eig, hermitian_part, isometry_defect, kron, matrix_unit, outer, permute_vector, trace_norm, vec,
    ComplexMatrix, FactorShape,
};

const TOL_ISOMETRY: f64 = 1e-9;
/// `λ_min` above which an iterate counts as strictly positive.
pub const TOL_POSITIVE: f64 = 1e-12;
/// Largest `d·cⁿ` accepted by [`finite_horizon_defects`].
pub const HORIZON_MAX: usize = 4096;

/// `v: C^d ⊗ C̄^d → (C^d ⊗ C̄^d) ⊗ (C^c ⊗ C̄^c)` with
/// `v(x ξ_φ) = Γ(x)(ξ_φ ⊗ ξ_ψ)`, a `d²c² × d²` matrix.
pub fn build_isometry(dil: &TensorDilation) -> Result<ComplexMatrix> {
    let phi = dil.modular_state()?;
    let v = isometry_unchecked(dil, &phi)?;
    let defect = isometry_defect(&v);
    if defect > TOL_ISOMETRY {
        return Err(Error::NotInvariant(defect));
    }
    Ok(v)
}

/// The linear map defined by the isometry relation, without checking `v*v = I`.
pub fn isometry_unchecked(dil: &TensorDilation, phi: &State) -> Result<ComplexMatrix> {
    let (d, c) = (dil.d(), dil.c());
    let inv_sqrt = phi.power(-0.5)?;
    let anchor = kron(&phi.sqrt_density(), &dil.psi().sqrt_density());
    let shape = FactorShape::new([d, c, d, c])?;
    let mut v = ComplexMatrix::zeros(d * d * c * c, d * d);
    for i in 0..d {
        for j in 0..d {
            let x = matrix_unit(d, i, j) * &inv_sqrt;
            // [d, c, d̄, c̄] → [d, d̄, c, c̄]
            let image = permute_vector(&vec(&(dil.gamma(&x) * &anchor)), &shape, &[0, 2, 1, 3])?;
            v.set_column(i * d + j, &image.column(0));
        }
    }
    Ok(v)
}

/// `v`, `Z′` (as a Kraus channel on `M_{d²}`) and the source dilation.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    v: ComplexMatrix,
    z_prime: KrausChannel,
    dilation: TensorDilation,
}

impl ScatteringData {
    pub fn new(dil: &TensorDilation) -> Result<Self> {
        let v = build_isometry(dil)?;
        let dd = dil.d() * dil.d();
        let cc = dil.c() * dil.c();
        // Kraus operators (I ⊗ ⟨g_j|) v
        let kraus = (0..cc)
            .map(|j| ComplexMatrix::from_fn(dd, dd, |r, col| v[(r * cc + j, col)]))
            .collect();
        let z_prime = KrausChannel::new(kraus)?;
        Ok(Self { v, z_prime, dilation: dil.clone() })
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn z_prime(&self) -> &KrausChannel {
        &self.z_prime
    }

    pub fn dilation(&self) -> &TensorDilation {
        &self.dilation
    }

    /// `v*(t ⊗ I)v` evaluated directly from `v`.
    pub fn apply_z_prime(&self, t: &ComplexMatrix) -> ComplexMatrix {
        let cc = self.dilation.c() * self.dilation.c();
        self.v.adjoint() * kron(t, &ComplexMatrix::identity(cc, cc)) * &self.v
    }
}

/// Materialized `Z′`; refused when `d⁴ > 1296`.
pub fn extended_dual(dil: &TensorDilation) -> Result<Superoperator> {
    let d = dil.d();
    if d.pow(4) > MATERIALIZE_MAX {
        return Err(Error::HorizonTooLarge(format!("Z′ of side {} is not materialized", d.pow(4))));
    }
    Ok(ScatteringData::new(dil)?.z_prime().transfer_matrix())
}

pub fn fixed_space_dim(so: &Superoperator) -> usize {
    so.fixed_space_dim()
}

/// Fixed-space dimension of `Z′`, iterative above the materialization limit.
pub fn z_prime_fixed_space_dim(dil: &TensorDilation) -> Result<usize> {
    Ok(channel_fixed_space_dim(ScatteringData::new(dil)?.z_prime()))
}

pub fn is_asymptotically_complete(dil: &TensorDilation) -> Result<bool> {
    Ok(z_prime_fixed_space_dim(dil)? == 1)
}

/// Left multiplication by `I_pre ⊗ op ⊗ I_post`, in place.
fn local_left(m: &mut ComplexMatrix, op: &ComplexMatrix, pre: usize, post: usize) {
    let k = op.nrows();
    let mut buf = vec![c64(0.0, 0.0); k];
    for col in 0..m.ncols() {
        for p in 0..pre {
            for q in 0..post {
                let row = |a: usize| (p * k + a) * post + q;
                for (a, b) in buf.iter_mut().enumerate() {
                    *b = m[(row(a), col)];
                }
                for a in 0..k {
                    m[(row(a), col)] = (0..k).map(|b| op[(a, b)] * buf[b]).sum();
                }
            }
        }
    }
}

/// Right multiplication by `I_pre ⊗ op ⊗ I_post`, in place.
fn local_right(m: &mut ComplexMatrix, op: &ComplexMatrix, pre: usize, post: usize) {
    let k = op.nrows();
    let mut buf = vec![c64(0.0, 0.0); k];
    for p in 0..pre {
        for q in 0..post {
            let col = |a: usize| (p * k + a) * post + q;
            for row in 0..m.nrows() {
                for (a, b) in buf.iter_mut().enumerate() {
                    *b = m[(row, col(a))];
                }
                for a in 0..k {
                    m[(row, col(a))] = (0..k).map(|b| buf[b] * op[(b, a)]).sum();
                }
            }
        }
    }
}

/// `z ↦ z` with `I_c` inserted right after the system slot; `z` acts on
/// `C^d ⊗ C^m`.
fn insert_environment(z: &ComplexMatrix, d: usize, m: usize, c: usize) -> ComplexMatrix {
    let n = d * c * m;
    let mut out = ComplexMatrix::zeros(n, n);
    for j in 0..d {
        for beta in 0..m {
            for i in 0..d {
                for alpha in 0..m {
                    let value = z[(i * m + alpha, j * m + beta)];
                    if value == c64(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..c {
                        out[((i * c + a) * m + alpha, (j * c + a) * m + beta)] = value;
                    }
                }
            }
        }
    }
    out
}

/// `δ_n = ‖αⁿ(x ⊗ 1) − 1 ⊗ (φ ⊗ Id)(αⁿ(x ⊗ 1))‖` in the `φ ⊗ ψ^{⊗n}` 2-norm,
/// for `n = 0..=n_max`.
pub fn finite_horizon_defects(dil: &TensorDilation, x: &ComplexMatrix, n_max: usize) -> Result<Vec<f64>> {
    let (d, c) = (dil.d(), dil.c());
    if x.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("observable of shape {:?} on M_{d}", x.shape())));
    }
    let size = (c as f64).powi(n_max as i32) * d as f64;
    if size > HORIZON_MAX as f64 {
        return Err(Error::HorizonTooLarge(format!("d·c^n = {size} exceeds {HORIZON_MAX}")));
    }
    let phi = dil.modular_state()?;
    let phi_sqrt = phi.sqrt_density();
    let psi_sqrt = dil.psi().sqrt_density();
    let u = dil.u();
    let u_adj = u.adjoint();

    let mut z = x.clone();
    let mut m = 1;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            let mut next = insert_environment(&z, d, m, c);
            local_left(&mut next, &u_adj, 1, m);
            local_right(&mut next, u, 1, m);
            z = next;
            m *= c;
        }
        out.push(defect_of(&z, phi.rho(), &phi_sqrt, &psi_sqrt, d, c, m, n));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn defect_of(
    z: &ComplexMatrix,
    rho_phi: &ComplexMatrix,
    phi_sqrt: &ComplexMatrix,
    psi_sqrt: &ComplexMatrix,
    d: usize,
    c: usize,
    m: usize,
    n: usize,
) -> f64 {
    // E(z) = tr_sys((ρ_φ ⊗ I) z)
    let mut e = ComplexMatrix::zeros(m, m);
    for i in 0..d {
        for j in 0..d {
            let w = rho_phi[(j, i)];
            if w == c64(0.0, 0.0) {
                continue;
            }
            for alpha in 0..m {
                for beta in 0..m {
                    e[(alpha, beta)] += w * z[(i * m + alpha, j * m + beta)];
                }
            }
        }
    }
    let mut w = z.clone();
    for i in 0..d {
        for alpha in 0..m {
            for beta in 0..m {
                w[(i * m + alpha, i * m + beta)] -= e[(alpha, beta)];
            }
        }
    }
    local_right(&mut w, phi_sqrt, 1, m);
    for slot in 0..n {
        local_right(&mut w, psi_sqrt, d * c.pow(slot as u32), c.pow((n - slot - 1) as u32));
    }
    w.norm()
}

pub fn finite_horizon_defect(dil: &TensorDilation, x: &ComplexMatrix, n: usize) -> Result<f64> {
    Ok(finite_horizon_defects(dil, x, n)?[n])
}

/// `Φ_α(z)(t) = Σ z[(i,k),(j,l)] ⟨t i_α(e_ij), i_{1/2−α}(e_kl)⟩` with
/// `i_α(x) = vec(ρ^α x ρ^{1/2−α})`.
pub struct PhiAlpha {
    d: usize,
    /// columns `i_α(e_ij)`
    a: ComplexMatrix,
    /// columns `i_{1/2−α}(e_kl)`
    b: ComplexMatrix,
}

impl PhiAlpha {
    pub fn new(phi: &State, alpha: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&alpha) {
            return Err(Error::DimensionMismatch(format!("alpha = {alpha} outside [0, 1/2]")));
        }
        let d = phi.dim();
        let (p, q) = (phi.power(alpha)?, phi.power(0.5 - alpha)?);
        let mut a = ComplexMatrix::zeros(d * d, d * d);
        let mut b = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let e = matrix_unit(d, i, j);
                a.set_column(i * d + j, &vec(&(&p * &e * &q)).column(0));
                b.set_column(i * d + j, &vec(&(&q * &e * &p)).column(0));
            }
        }
        Ok(Self { d, a, b })
    }

    pub fn eval(&self, z: &ComplexMatrix, t: &ComplexMatrix) -> num_complex::Complex64 {
        let d = self.d;
        let pairing = self.b.adjoint() * t * &self.a;
        let mut total = c64(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        total += z[(i * d + k, j * d + l)] * pairing[(k * d + l, i * d + j)];
                    }
                }
            }
        }
        total
    }
}

/// Largest `|Φ_α(T̂_Δ(z))(t) − Φ_α(z)(Z′(t))|` over `samples` seeded draws of
/// `z = x ⊗ conj(y)` and `t`.
pub fn duality_check(dil: &TensorDilation, alpha: f64, samples: usize, seed: u64) -> Result<f64> {
    let phi = dil.modular_state()?;
    let pa = PhiAlpha::new(&phi, alpha)?;
    let data = ScatteringData::new(dil)?;
    let hat = diagonal_coupling(dil);
    let d = dil.d();
    let mut rng = random::rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = random::random_matrix(&mut rng, d, d);
        let y = random::random_matrix(&mut rng, d, d);
        let t = random::random_matrix(&mut rng, d * d, d * d);
        let z = kron(&x, &conj(&y));
        let lhs = pa.eval(&hat.channel().apply(&z)?, &t);
        let rhs = pa.eval(&z, &data.apply_z_prime(&t));
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Mixing certificate from the iterates `q_n = T̂_Δⁿ(p_Δ)`.
#[derive(Debug, Clone, Serialize)]
pub struct MixingCertificate {
    pub n0: usize,
    pub r: f64,
    /// `(n, λ_min(q_n))` for `n = 0..=n_max`.
    pub p_delta_min_eigs: Vec<(usize, f64)>,
    pub complete: bool,
    pub fix_dim_z: usize,
    pub fix_dim_coupling: usize,
    /// Completeness of `Z′`, triviality of the coupling's fixed space and
    /// strict positivity of some iterate all agree.
    pub consistent: bool,
    #[serde(skip)]
    coupling: KrausChannel,
    #[serde(skip)]
    last: ComplexMatrix,
}

impl MixingCertificate {
    pub fn n_max(&self) -> usize {
        self.p_delta_min_eigs.len() - 1
    }

    pub fn coupling(&self) -> &KrausChannel {
        &self.coupling
    }

    /// `λ_min(T̂_Δⁿ(p_Δ))`, iterating past the stored horizon when needed.
    pub fn lambda_min(&self, n: usize) -> Result<f64> {
        if let Some(&(_, l)) = self.p_delta_min_eigs.get(n) {
            return Ok(l);
        }
        let mut q = self.last.clone();
        for _ in self.n_max()..n {
            q = hermitian_part(&self.coupling.apply(&q)?);
        }
        Ok(herm_eig(&q)?.min())
    }
}

/// Iterates of `T̂_Δⁿ(p_Δ)` for `n = 0..=n_max` by repeated channel
/// application, with their smallest eigenvalues.
pub fn coupling_iterates(hat: &KrausChannel, p: &ComplexMatrix, n_max: usize) -> Result<Vec<ComplexMatrix>> {
    let mut out = vec![p.clone()];
    for n in 0..n_max {
        out.push(hermitian_part(&hat.apply(&out[n])?));
    }
    Ok(out)
}

pub fn certificate(dil: &TensorDilation, n_max: usize) -> Result<MixingCertificate> {
    let phi = dil.modular_state()?;
    let hat = diagonal_coupling(dil).channel().clone();
    let p = support_projection(&phi);
    let iterates = coupling_iterates(&hat, p.matrix(), n_max)?;
    let mins = iterates
        .iter()
        .map(|q| herm_eig(q).map(|e| e.min()))
        .collect::<Result<Vec<f64>>>()?;
    let fix_dim_z = z_prime_fixed_space_dim(dil)?;
    let fix_dim_coupling = channel_fixed_space_dim(&hat);
    let n0 = mins.iter().position(|&l| l > TOL_POSITIVE);
    let complete = fix_dim_z == 1;
    let consistent = complete == (fix_dim_coupling == 1) && complete == n0.is_some();
    let n0 = n0.ok_or(Error::NotStrictlyPositive(n_max))?;
    Ok(MixingCertificate {
        n0,
        r: mins[n0],
        p_delta_min_eigs: mins.into_iter().enumerate().collect(),
        complete,
        fix_dim_z,
        fix_dim_coupling,
        consistent,
        coupling: hat,
        last: iterates.into_iter().last().expect("nonempty"),
    })
}

/// `(4(1 − λ_min(q_n))^{1/2}, 4(1 − r)^{⌊n/n0⌋/2})`.
pub fn mixing_bound(cert: &MixingCertificate, n: usize) -> Result<(f64, f64)> {
    let lambda = cert.lambda_min(n)?.clamp(0.0, 1.0);
    let direct = 4.0 * (1.0 - lambda).sqrt();
    let closed = 4.0 * (1.0 - cert.r).powf((n / cert.n0) as f64 / 2.0);
    Ok((direct, closed))
}

/// Smallest `n` with closed-form bound at most `eps`.
pub fn closed_form_horizon(cert: &MixingCertificate, eps: f64) -> usize {
    let steps = ((eps / 4.0).ln() * 2.0 / (1.0 - cert.r).ln()).ceil().max(0.0) as usize;
    steps * cert.n0
}

/// Trace distances `‖T̂_{Δ*}ⁿ(ρ̂₀) − |ξ_φ⟩⟨ξ_φ|‖₁` for `n = 0..=n_max`.
pub fn absorption_curve(hat: &KrausChannel, phi: &State, rho0: &ComplexMatrix, n_max: usize) -> Result<Vec<f64>> {
    let target = outer(&gns_vector(phi));
    let mut rho = rho0.clone();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            rho = hermitian_part(&hat.predual_apply(&rho)?);
        }
        out.push(trace_norm(&(&rho - &target))?);
    }
    Ok(out)
}

/// Compression of `q` to `span{e_i ⊗ e_j : j − i = k}`, basis ordered by `i`.
pub fn sector_block(q: &ComplexMatrix, d: usize, k: isize) -> ComplexMatrix {
    let idx = sector_indices(d, k);
    ComplexMatrix::from_fn(idx.len(), idx.len(), |a, b| q[(idx[a], idx[b])])
}

fn sector_indices(d: usize, k: isize) -> Vec<usize> {
    (0..d)
        .filter_map(|i| {
            let j = i as isize + k;
            (0..d as isize).contains(&j).then(|| i * d + j as usize)
        })
        .collect()
}

/// Largest entry of `q` coupling different sectors `j − i`.
pub fn off_sector_residual(q: &ComplexMatrix, d: usize) -> f64 {
    let sector = |r: usize| (r % d) as isize - (r / d) as isize;
    let mut worst = 0.0_f64;
    for r in 0..q.nrows() {
        for s in 0..q.ncols() {
            if sector(r) != sector(s) {
                worst = worst.max(q[(r, s)].norm());
            }
        }
    }
    worst
}
