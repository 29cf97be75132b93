//! Acceptance harness: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always appear in `cargo test` output.

use std::process::ExitCode;

use qmc_core::classical::{
    alternating_sum_bound, alternating_sum_report, classical_mixing_series, max_pair_distance,
    nonsync_enumeration_oracle, nonsync_series, stochastic_matrix, three_state_rate, RoadColoring,
};
use qmc_core::diagonal::{
    diagonal_state, gns_vector, is_diagonal_projection, maximal_diagonal_projection, optimize_overlap, qci_bounds,
    support_projection, CouplingState, QciBounds,
};
use qmc_core::dilation::{diagonal_coupling, extremality_rank, normalize_phase, validate, TensorDilation};
use qmc_core::fixtures::{qubit_pair, qutrit_coupling_kraus, qutrit_dilation, three_state_coloring};
use qmc_core::quantum::{channel_fixed_space_dim, state_distance, subdominant_modulus};
use qmc_core::random::{modular_unitary, random_coloring, random_density, random_matrix, random_unitary, rng};
use qmc_core::scattering::{
    absorption_curve, certificate, closed_form_horizon, coupling_iterates, duality_check, mixing_bound,
    off_sector_residual, sector_block, z_prime_fixed_space_dim,
};
use qmc_core::tensor::{hermiticity_defect, max_abs_diff, outer, real_matrix};
use qmc_core::{ComplexMatrix, Error, KrausChannel, State};

use qmc_cli::input::{coloring_from_str, dilation_from_str};
use qmc_cli::{IDENTITY_DILATION_JSON, QUTRIT_DILATION_JSON, THREE_STATE_COLORING_JSON};

struct Outcome {
    pass: bool,
    detail: String,
}

/// Criteria whose reference value cannot be met; their attainable parts are
/// still enforced through `enforced`.
const KNOWN_UNATTAINABLE: &[usize] = &[7];

fn s2() -> f64 {
    2f64.sqrt()
}

fn qutrit() -> TensorDilation {
    dilation_from_str(QUTRIT_DILATION_JSON, "qutrit_dilation.json").expect("bundled fixture")
}

fn c1() -> Outcome {
    let dil = qutrit();
    let same_as_builtin = max_abs_diff(dil.u(), qutrit_dilation().u());
    let hat = diagonal_coupling(&dil);
    let printed = KrausChannel::new(qutrit_coupling_kraus().to_vec()).unwrap();
    let distance = hat.channel().distance(&printed);
    let matched = qutrit_coupling_kraus()
        .iter()
        .filter(|t| {
            let t = normalize_phase(t);
            hat.kraus().iter().filter(|w| max_abs_diff(&normalize_phase(w), &t) <= 1e-10).count() == 1
        })
        .count();
    Outcome {
        pass: distance <= 1e-10 && matched == 4 && hat.kraus().len() == 4 && same_as_builtin < 1e-15,
        detail: format!("transfer distance {distance:.2e}, {matched}/4 Kraus operators matched after phase normalization"),
    }
}

fn c2() -> Outcome {
    let cert = certificate(&qutrit(), 2).unwrap();
    let expected = (569.0 - 268.0 * s2() - 9.0 * (625.0 - 216.0 * s2()).sqrt()) / 2016.0;
    let err = (cert.r - expected).abs();
    Outcome { pass: cert.n0 == 2 && err <= 1e-10, detail: format!("n0 = {}, r = {:.12} (|err| {err:.1e})", cert.n0, cert.r) }
}

fn c3() -> Outcome {
    let dil = qutrit();
    let hat = diagonal_coupling(&dil);
    let p = support_projection(dil.phi().unwrap());
    let q = &coupling_iterates(hat.channel(), p.matrix(), 2).unwrap()[2];
    let s = s2();
    let m = |rows: &[&[f64]]| real_matrix(rows).unscale(1008.0);

    let p2 = (sector_block(q, 3, 2)[(0, 0)].re - (11.0 / 84.0 - 5.0 * s / 63.0)).abs();
    let p1_expected = m(&[&[379.0 - 152.0 * s, 54.0 - 9.0 * s], &[54.0 - 9.0 * s, 190.0 - 116.0 * s]]);
    let p1 = max_abs_diff(&sector_block(q, 3, 1), &p1_expected).max(max_abs_diff(&sector_block(q, 3, -1), &p1_expected));
    let p0 = sector_block(q, 3, 0);
    let displayed = m(&[
        &[717.0 - 16.0 * s, 52.0 + 189.0 * s, 204.0 - 20.0 * s],
        &[52.0 + 189.0 * s, 483.0 - 80.0 * s, 56.0 - 147.0 * s],
        &[204.0 - 20.0 * s, 56.0 + 147.0 * s, 306.0 - 16.0 * s],
    ]);
    let mut p0_err = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            if (i, j) != (1, 2) && (i, j) != (2, 1) {
                p0_err = p0_err.max((p0[(i, j)] - displayed[(i, j)]).norm());
            }
        }
    }
    let plus = (56.0 + 147.0 * s) / 1008.0;
    let minus = (56.0 - 147.0 * s) / 1008.0;
    let entry = p0[(1, 2)].re;
    let sign = if (entry - plus).abs() <= 1e-10 {
        "+"
    } else if (entry - minus).abs() <= 1e-10 {
        "-"
    } else {
        "neither"
    };
    let hermitian = hermiticity_defect(&p0) <= 1e-12 && (p0[(1, 2)] - p0[(2, 1)]).norm() <= 1e-12;
    Outcome {
        pass: p2 <= 1e-10 && p1 <= 1e-10 && p0_err <= 1e-10 && hermitian && sign != "neither"
            && off_sector_residual(q, 3) <= 1e-12,
        detail: format!(
            "p2 err {p2:.1e}, p1 err {p1:.1e}, p0 err {p0_err:.1e} off (2,3)/(3,2); resolved (2,3) sign: {sign} \
             (computed {entry:.12} = (56 {sign} 147 sqrt2)/1008, Hermitian)"
        ),
    }
}

fn c4() -> Outcome {
    let cert = certificate(&qutrit(), 2).unwrap();
    let identity = dilation_from_str(IDENTITY_DILATION_JSON, "identity_dilation.json").unwrap();
    let fix_z = z_prime_fixed_space_dim(&identity).unwrap();
    let fix_c = channel_fixed_space_dim(diagonal_coupling(&identity).channel());
    let withheld = matches!(certificate(&identity, 20), Err(Error::NotStrictlyPositive(_)));
    Outcome {
        pass: cert.fix_dim_z == 1 && cert.fix_dim_coupling == 1 && cert.complete && fix_z > 1 && fix_c > 1 && withheld,
        detail: format!(
            "qutrit: fix_dim_Z = {}, fix_dim_coupling = {}; u = I: {fix_z}, {fix_c}, certificate withheld = {withheld}",
            cert.fix_dim_z, cert.fix_dim_coupling
        ),
    }
}

fn c5() -> Outcome {
    let dil = qutrit();
    let residuals: Vec<f64> = [0.0, 0.25, 0.5].iter().map(|&a| duality_check(&dil, a, 20, 0).unwrap()).collect();
    Outcome {
        pass: residuals.iter().all(|&r| r <= 1e-9),
        detail: format!("residuals at alpha = 0, 1/4, 1/2: {:.1e}, {:.1e}, {:.1e}", residuals[0], residuals[1], residuals[2]),
    }
}

fn c6() -> Outcome {
    let dil = qutrit();
    let horizon = closed_form_horizon(&certificate(&dil, 2).unwrap(), 1e-3);
    let cert = certificate(&dil, horizon).unwrap();
    let bounds: Vec<f64> = (0..=horizon).map(|n| mixing_bound(&cert, n).unwrap().0).collect();
    let mut r = rng(6);
    let (mut worst_final, mut worst_excess, mut slowest) = (0.0_f64, f64::NEG_INFINITY, 0usize);
    for _ in 0..10 {
        let curve = absorption_curve(cert.coupling(), dil.phi().unwrap(), &random_density(&mut r, 9), horizon).unwrap();
        worst_final = worst_final.max(curve[horizon]);
        slowest = slowest.max(curve.iter().position(|&x| x < 1e-3).unwrap_or(usize::MAX));
        for n in (0..=horizon).step_by(2) {
            worst_excess = worst_excess.max(curve[n] - bounds[n]);
        }
    }
    Outcome {
        pass: worst_final < 1e-3 && worst_excess <= 1e-9,
        detail: format!(
            "closed-form horizon n = {horizon}; all 10 below 1e-3 by n = {slowest}; max excess over bound at even n {worst_excess:.1e}"
        ),
    }
}

/// `1/4 + √2/4 + √(11 − 2√2)/12`: symbolic oracle for the qutrit `T`.
fn qutrit_exact_modulus() -> f64 {
    0.25 + s2() / 4.0 + (11.0 - 2.0 * s2()).sqrt() / 12.0
}

fn c7(enforced: &mut Vec<String>) -> Outcome {
    let rc = coloring_from_str(THREE_STATE_COLORING_JSON, "three_state_coloring.json").unwrap();
    let classical = subdominant_modulus(&stochastic_matrix(&rc));
    let quantum = qutrit().induced_channel().transfer_matrix().subdominant_modulus();
    let reference = 1.0 / 12.0 + s2() / 3.0 + 5f64.sqrt() / 12.0;
    let classical_ok = (classical - three_state_rate()).abs() <= 1e-12;
    let exact_ok = (quantum - qutrit_exact_modulus()).abs() <= 1e-10;
    if !classical_ok {
        enforced.push(format!("criterion 7: three-state modulus {classical}"));
    }
    if !exact_ok {
        enforced.push(format!("criterion 7: qutrit modulus {quantum} differs from the exact spectrum"));
    }
    Outcome {
        pass: classical_ok && (quantum - reference).abs() <= 1e-10,
        detail: format!(
            "three-state {classical:.12} (ok = {classical_ok}); qutrit {quantum:.12} vs reference {reference:.12}: \
             reference is not an eigenvalue modulus of T, exact value 1/4 + sqrt2/4 + sqrt(11 - 2 sqrt2)/12 matches = {exact_ok}"
        ),
    }
}

fn oracle_gap(rc: &RoadColoring, n_max: usize) -> f64 {
    let exact = nonsync_series(rc, n_max);
    (0..=n_max).map(|n| (nonsync_enumeration_oracle(rc, n).unwrap() - exact[n]).abs()).fold(0.0, f64::max)
}

fn c8() -> Outcome {
    let rc = three_state_coloring();
    let gap = oracle_gap(&rc, 10);
    let mut r = rng(8);
    let random_gap = (0..20).map(|_| oracle_gap(&random_coloring(&mut r, 3, 3), 10)).fold(0.0, f64::max);
    let series = nonsync_series(&rc, 12);
    let binomial = (0..=12).map(|n| (alternating_sum_bound(n).0 - series[n]).abs()).fold(0.0, f64::max);
    let n2 = (series[2] - 31.0 / 36.0).abs();
    let n3 = (series[3] - 25.0 / 36.0).abs();
    Outcome {
        pass: gap <= 1e-12 && random_gap <= 1e-12 && binomial <= 1e-12 && n2 <= 1e-12 && n3 <= 1e-12,
        detail: format!(
            "oracle gap {gap:.1e} (three-state), {random_gap:.1e} (20 random); binomial gap {binomial:.1e}; n=2 err {n2:.1e}, n=3 err {n3:.1e}"
        ),
    }
}

fn c9() -> Outcome {
    let rc = three_state_coloring();
    let mixing = classical_mixing_series(&rc, 20);
    let mut coupling_ok = true;
    let mut rate_ok = true;
    for n in 0..=20 {
        let measured = max_pair_distance(&rc, n);
        coupling_ok &= measured <= mixing[n] + 1e-12;
        rate_ok &= measured <= 4.0 * three_state_rate().powi(n as i32) + 1e-12;
    }
    println!("    binomial_sum vs 2 rate^n:");
    println!("    {:>3}  {:>20}  {:>20}  holds", "n", "binomial_sum", "2 rate^n");
    let report = alternating_sum_report(12);
    for row in &report {
        println!("    {:>3}  {:>20.12e}  {:>20.12e}  {}", row.n, row.binomial_sum, row.closed_form, row.holds);
    }
    let early_ok = report.iter().filter(|r| (2..=7).contains(&r.n)).all(|r| r.holds);
    Outcome {
        pass: coupling_ok && rate_ok && early_ok,
        detail: format!(
            "coupling bound dominates (n <= 20): {coupling_ok}; 4 rate^n dominates: {rate_ok}; comparison holds for 2 <= n <= 7: {early_ok}"
        ),
    }
}

fn c10() -> Outcome {
    let mut r = rng(10);
    let mut violations = 0;
    let mut checks = 0;
    for k in 0..100 {
        let d = 2 + k % 2;
        let c = CouplingState::new(random_density(&mut r, d * d)).unwrap();
        let dist = state_distance(c.marginal_1(), c.marginal_2()).unwrap();
        for _ in 0..5 {
            let p = maximal_diagonal_projection(&random_unitary(&mut r, d)).unwrap();
            let b = qci_bounds(&c, &p).unwrap();
            checks += 1;
            if !(dist <= b.refined + 1e-12 && b.refined <= b.bound4 + 1e-15) {
                violations += 1;
            }
        }
    }
    let (e1, plus) = qubit_pair();
    let distance = state_distance(&e1, &plus).unwrap();
    let overlap = optimize_overlap(&CouplingState::product(&e1, &plus).unwrap(), 1001).best;
    let refined = QciBounds::from_overlap(0.75).refined;
    let example_ok = (distance - s2()).abs() <= 1e-12
        && (overlap - 0.75).abs() <= 1e-4
        && (refined - (1.0 + 3f64.sqrt() / 2.0)).abs() <= 1e-12;
    Outcome {
        pass: violations == 0 && example_ok,
        detail: format!(
            "{violations} violations in {checks} checks; example: distance {distance:.12}, overlap {overlap:.6}, refined {refined:.12}"
        ),
    }
}

/// Partial traces by explicit index sums.
fn marginals_oracle(rho: &ComplexMatrix, d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let first = ComplexMatrix::from_fn(d, d, |i, j| (0..d).map(|k| rho[(i * d + k, j * d + k)]).sum());
    let second = ComplexMatrix::from_fn(d, d, |i, j| (0..d).map(|k| rho[(k * d + j, k * d + i)]).sum());
    (first, second)
}

fn low_rank_state(r: &mut qmc_core::random::Rng, d: usize, rank: usize) -> State {
    let g = random_matrix(r, d, rank);
    let m = &g * g.adjoint();
    let t = m.trace();
    State::new(m.map(|z| z / t)).unwrap()
}

fn c11() -> Outcome {
    let mut r = rng(11);
    let mut failures = Vec::new();

    // coupling marginals
    for k in 0..20 {
        let d = 2 + k % 2;
        let rho = random_density(&mut r, d * d);
        let c = CouplingState::new(rho.clone()).unwrap();
        let (m1, m2) = marginals_oracle(&rho, d);
        if max_abs_diff(c.marginal_1().rho(), &m1) > 1e-12 || max_abs_diff(c.marginal_2().rho(), &m2) > 1e-12 {
            failures.push("marginals");
        }
        let s = State::new(random_density(&mut r, d)).unwrap();
        let t = State::new(random_density(&mut r, d)).unwrap();
        if !diagonal_state(&s).is_coupling_of(&s, &s).unwrap()
            || !CouplingState::product(&s, &t).unwrap().is_coupling_of(&s, &t).unwrap()
        {
            failures.push("coupling predicate");
        }
    }

    // diagonal projections
    for k in 0..20 {
        let d = 2 + k % 2;
        let s = low_rank_state(&mut r, d, 1 + k % d);
        let basis = maximal_diagonal_projection(&random_unitary(&mut r, d)).unwrap();
        if !is_diagonal_projection(support_projection(&s).matrix()).unwrap()
            || !is_diagonal_projection(basis.matrix()).unwrap()
        {
            failures.push("diagonal projection");
        }
        if is_diagonal_projection(&ComplexMatrix::identity(d * d, d * d)).unwrap() {
            failures.push("identity accepted as diagonal");
        }
    }

    // invariance of the diagonal state for modular-commuting dilations
    for (phi, psi) in [(vec![2. / 3., 1. / 3.], vec![1. / 3., 2. / 3.]), (vec![0.5, 0.25, 0.25], vec![0.5, 0.5])] {
        let weights: Vec<f64> = phi.iter().flat_map(|a| psi.iter().map(move |b| a * b)).collect();
        for _ in 0..5 {
            let u = modular_unitary(&mut r, &weights);
            let phi_state = State::from_diagonal(&phi).unwrap();
            let dil =
                TensorDilation::new(u, State::from_diagonal(&psi).unwrap(), Some(phi_state.clone())).unwrap();
            let target = outer(&gns_vector(&phi_state));
            let image = diagonal_coupling(&dil).channel().predual_apply(&target).unwrap();
            if max_abs_diff(&image, &target) > 1e-10 || !validate(&dil).unwrap().pass {
                failures.push("diagonal state invariance");
            }
        }
    }

    // monotone smallest eigenvalues
    let cert = certificate(&qutrit(), 60).unwrap();
    let mins: Vec<f64> = cert.p_delta_min_eigs.iter().map(|&(_, l)| l).collect();
    if !mins.windows(2).all(|w| w[1] >= w[0] - 1e-12) {
        failures.push("lambda_min monotonicity");
    }

    // extremality
    let ranks = (extremality_rank(&qutrit_coupling_kraus()), extremality_rank(diagonal_coupling(&qutrit()).kraus()));
    if ranks != (16, 16) {
        failures.push("extremality rank");
    }

    failures.dedup();
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("marginals, projections, invariance, monotone lambda_min (n <= 60), extremality ranks {ranks:?}")
        } else {
            format!("failed: {}", failures.join(", "))
        },
    }
}

fn main() -> ExitCode {
    let mut enforced = Vec::new();
    let results = vec![
        ("Kraus reproduction of the diagonal coupling", c1()),
        ("certificate constant r", c2()),
        ("sector blocks of the second iterate", c3()),
        ("completeness verdicts", c4()),
        ("duality of coupling and extended dual", c5()),
        ("uniform absorption", c6()),
        ("spectral constants", c7(&mut enforced)),
        ("classical exactness", c8()),
        ("classical bounds", c9()),
        ("coupling inequality suite", c10()),
        ("structural property suites", c11()),
    ];
    let mut unexpected = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let id = i + 1;
        println!("criterion {id:>2}: {}  {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        if !outcome.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected += 1;
        }
    }
    let passed = results.iter().filter(|(_, o)| o.pass).count();
    println!("{passed} of {} criteria pass", results.len());
    for msg in &enforced {
        println!("enforced check failed: {msg}");
    }
    if unexpected == 0 && enforced.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
