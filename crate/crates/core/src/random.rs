//! Seeded random matrices for property checks and sampling harnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classical::RoadColoring;
use crate::tensor::{c64, ComplexMatrix};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_hermitian(rng: &mut Rng, d: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d, d);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(rng: &mut Rng, d: usize) -> ComplexMatrix {
    let qr = random_matrix(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c64(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank density matrix `G G* / tr(G G*)`.
pub fn random_density(rng: &mut Rng, d: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d, d);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m.unscale(t)
}

/// Random unit vector.
pub fn random_unit_vector(rng: &mut Rng, d: usize) -> ComplexMatrix {
    let v = random_matrix(rng, d, 1);
    let n = v.norm();
    v.unscale(n)
}

pub fn random_probability_vector(rng: &mut Rng, n: usize) -> Vec<f64> {
    use rand::Rng as _;
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Unitary commuting with `diag(weights)`: an independent Haar block on each
/// group of equal weights.
pub fn modular_unitary(rng: &mut Rng, weights: &[f64]) -> ComplexMatrix {
    let n = weights.len();
    let mut u = ComplexMatrix::zeros(n, n);
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let group: Vec<usize> = (i..n).filter(|&j| (weights[j] - weights[i]).abs() < 1e-12).collect();
        let block = random_unitary(rng, group.len());
        for (a, &ga) in group.iter().enumerate() {
            seen[ga] = true;
            for (b, &gb) in group.iter().enumerate() {
                u[(ga, gb)] = block[(a, b)];
            }
        }
    }
    u
}

/// Road coloring with uniformly random maps and color probabilities bounded
/// away from zero (each at least `0.1 / (colors·1.1)`).
pub fn random_coloring(rng: &mut Rng, states: usize, colors: usize) -> RoadColoring {
    use rand::Rng as _;
    let gamma = (0..colors).map(|_| (0..states).map(|_| rng.random_range(0..states)).collect()).collect();
    let raw: Vec<f64> = (0..colors).map(|_| rng.random::<f64>() + 0.1).collect();
    let total: f64 = raw.iter().sum();
    let nu = raw.iter().map(|x| x / total).collect();
    let labels = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    RoadColoring::new(labels("s", states), labels("c", colors), gamma, nu).expect("valid by construction")
}
