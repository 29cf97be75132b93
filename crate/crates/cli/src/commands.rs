//! Subcommand bodies. Each returns the text to print on stdout and the exit
//! code; errors carry their own exit code.

use std::fmt::Write as _;

use serde::Serialize;

use qmc_core::classical::{
    alternating_sum_bound, classical_mixing_series, nonsync_enumeration_oracle, sync_report, RoadColoring,
    SumComparison,
};
use qmc_core::dilation::{diagonal_coupling, validate, TensorDilation, ValidationReport};
use qmc_core::fixtures::three_state_coloring;
use qmc_core::quantum::channel_fixed_space_dim;
use qmc_core::scattering::{
    certificate, duality_check, finite_horizon_defects, mixing_bound, z_prime_fixed_space_dim, HORIZON_MAX,
};
use qmc_core::tensor::{isometry_defect, matrix_unit};
use qmc_core::Error as CoreError;

use crate::error::{exit, CliError, CliResult};
use crate::format::{csv_line, sci};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Validation report, or a validation failure when no faithful invariant
/// state is available at all.
fn validation_of(dil: &TensorDilation) -> CliResult<ValidationReport> {
    validate(dil).map_err(|e| match e {
        CoreError::HorizonTooLarge(_) | CoreError::Numerical(_) => CliError::Guard(e.to_string()),
        other => CliError::Validation(other.to_string()),
    })
}

fn validation_table(v: &ValidationReport) -> String {
    let tol = qmc_core::dilation::TOL_VALIDATION;
    let rows = [
        ("unitarity_defect", v.unitarity_defect, v.unitarity_defect <= tol),
        ("psi_min_eigenvalue", v.psi_min_eigenvalue, v.psi_min_eigenvalue > tol),
        ("invariance_residual", v.invariance_residual, v.invariance_residual <= tol),
        ("generator_residual", v.generator_residual, v.generator_residual <= tol),
    ];
    let mut out = String::new();
    for (name, value, ok) in rows {
        let _ = writeln!(out, "  {name:<22}{:>20}  {}", sci(value), verdict(ok));
    }
    let _ = writeln!(
        out,
        "  {:<22}{:>20}  {} (sufficient condition only)",
        "commutant_residual",
        sci(v.commutant_residual),
        verdict(v.commutant_pass)
    );
    let phi: Vec<String> = v.phi_eigenvalues.iter().map(|&x| sci(x)).collect();
    let _ = writeln!(out, "  invariant state ({:?}): eigenvalues [{}]", v.phi_source, phi.join(", "));
    let _ = writeln!(out, "  verdict: {}", verdict(v.pass));
    out
}

/// Residuals that need no invariant state, for inputs where none exists.
#[derive(Debug, Clone, Serialize)]
pub struct PartialValidation {
    pub unitarity_defect: f64,
    pub psi_min_eigenvalue: f64,
    pub reason: String,
    pub pass: bool,
}

fn partial_validation(dil: &TensorDilation, reason: String, out: OutFormat) -> Outcome {
    let p = PartialValidation {
        unitarity_defect: isometry_defect(dil.u()),
        psi_min_eigenvalue: dil.psi().min_eigenvalue(),
        reason,
        pass: false,
    };
    let stdout = match out {
        OutFormat::Json => json(&p),
        _ => {
            let tol = qmc_core::dilation::TOL_VALIDATION;
            let mut s = format!("validation (d = {}, c = {})\n", dil.d(), dil.c());
            let _ = writeln!(s, "  {:<22}{:>20}  {}", "unitarity_defect", sci(p.unitarity_defect), verdict(p.unitarity_defect <= tol));
            let _ = writeln!(s, "  {:<22}{:>20}  {}", "psi_min_eigenvalue", sci(p.psi_min_eigenvalue), verdict(p.psi_min_eigenvalue > tol));
            let _ = writeln!(s, "  remaining residuals unavailable: {}", p.reason);
            let _ = writeln!(s, "  verdict: FAIL");
            s
        }
    };
    Outcome { code: exit::VALIDATION, stdout }
}

pub fn cmd_validate(dil: &TensorDilation, out: OutFormat) -> CliResult<Outcome> {
    let v = match validation_of(dil) {
        Ok(v) => v,
        Err(CliError::Validation(reason)) => return Ok(partial_validation(dil, reason, out)),
        Err(e) => return Err(e),
    };
    let stdout = match out {
        OutFormat::Json => json(&v),
        _ => format!("validation (d = {}, c = {})\n{}", dil.d(), dil.c(), validation_table(&v)),
    };
    Ok(Outcome { code: if v.pass { exit::OK } else { exit::VALIDATION }, stdout })
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub alphas: Vec<f64>,
    pub max_n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Defect horizon; `None` picks the largest safe value up to 6.
    pub defect_n: Option<usize>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { alphas: vec![0.0, 0.25, 0.5], max_n: 20, samples: 20, seed: 0, defect_n: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub n0: usize,
    pub r: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub lambda_min: f64,
    pub direct_bound: f64,
    pub closed_form_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityRow {
    pub alpha: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectRow {
    pub n: usize,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub validation: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fix_dim_z: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fix_dim_coupling: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_withheld: Option<String>,
    pub bounds: Vec<BoundRow>,
    pub duality: Vec<DualityRow>,
    pub defects: Vec<DefectRow>,
    pub seed: u64,
}

/// Largest `n` with `d·cⁿ` within the defect guard.
fn safe_defect_horizon(d: usize, c: usize) -> usize {
    let mut n = 0;
    let mut size = d;
    while c > 1 && size * c <= HORIZON_MAX {
        size *= c;
        n += 1;
    }
    if c == 1 {
        usize::MAX
    } else {
        n
    }
}

pub fn analyze(dil: &TensorDilation, opts: &AnalyzeOptions) -> CliResult<AnalysisReport> {
    let validation = validation_of(dil)?;
    let mut report = AnalysisReport {
        validation,
        complete: None,
        fix_dim_z: None,
        fix_dim_coupling: None,
        certificate: None,
        certificate_withheld: None,
        bounds: Vec::new(),
        duality: Vec::new(),
        defects: Vec::new(),
        seed: opts.seed,
    };
    if !report.validation.pass || opts.max_n == 0 {
        return Ok(report);
    }

    match certificate(dil, opts.max_n) {
        Ok(cert) => {
            report.complete = Some(cert.complete);
            report.fix_dim_z = Some(cert.fix_dim_z);
            report.fix_dim_coupling = Some(cert.fix_dim_coupling);
            report.certificate = Some(CertificateSummary { n0: cert.n0, r: cert.r, consistent: cert.consistent });
            for n in 0..=opts.max_n {
                let (direct, closed) = mixing_bound(&cert, n)?;
                report.bounds.push(BoundRow {
                    n,
                    lambda_min: cert.lambda_min(n)?,
                    direct_bound: direct,
                    closed_form_bound: closed,
                });
            }
        }
        Err(CoreError::NotStrictlyPositive(n)) => {
            let fix_z = z_prime_fixed_space_dim(dil)?;
            report.complete = Some(fix_z == 1);
            report.fix_dim_z = Some(fix_z);
            report.fix_dim_coupling = Some(channel_fixed_space_dim(diagonal_coupling(dil).channel()));
            report.certificate_withheld =
                Some(format!("no iterate of the diagonal projection is strictly positive up to n = {n}"));
        }
        Err(e) => return Err(e.into()),
    }

    for &alpha in &opts.alphas {
        report.duality.push(DualityRow { alpha, residual: duality_check(dil, alpha, opts.samples, opts.seed)? });
    }

    let horizon = opts
        .defect_n
        .unwrap_or_else(|| 6.min(safe_defect_horizon(dil.d(), dil.c())))
        .min(opts.max_n);
    let x = matrix_unit(dil.d(), 0, 0);
    report.defects = finite_horizon_defects(dil, &x, horizon)?
        .into_iter()
        .enumerate()
        .map(|(n, defect)| DefectRow { n, defect })
        .collect();
    Ok(report)
}

pub const BOUND_HEADER: &str = "n,lambda_min,direct_bound,closed_form_bound";

pub fn bounds_csv(rows: &[BoundRow]) -> String {
    let mut out = format!("{BOUND_HEADER}\n");
    for r in rows {
        out.push_str(&csv_line(&[r.n.to_string(), sci(r.lambda_min), sci(r.direct_bound), sci(r.closed_form_bound)]));
        out.push('\n');
    }
    out
}

fn analysis_text(r: &AnalysisReport) -> String {
    let mut out = format!("validation\n{}", validation_table(&r.validation));
    if !r.validation.pass {
        return out;
    }
    let Some(complete) = r.complete else {
        out.push_str("analysis skipped (max-n = 0)\n");
        return out;
    };
    let _ = writeln!(out, "\ncompleteness");
    let _ = writeln!(out, "  fix_dim_Z              {}", r.fix_dim_z.unwrap_or(0));
    let _ = writeln!(out, "  fix_dim_coupling       {}", r.fix_dim_coupling.unwrap_or(0));
    let _ = writeln!(out, "  complete               {complete}");
    match (&r.certificate, &r.certificate_withheld) {
        (Some(c), _) => {
            let _ = writeln!(out, "\ncertificate");
            let _ = writeln!(out, "  n0                     {}", c.n0);
            let _ = writeln!(out, "  r                      {}", sci(c.r));
            let _ = writeln!(out, "  consistent             {}", c.consistent);
            let _ = writeln!(out, "\n{}", bounds_csv(&r.bounds).trim_end());
        }
        (None, Some(why)) => {
            let _ = writeln!(out, "\ncertificate withheld: {why}");
        }
        (None, None) => {}
    }
    let _ = writeln!(out, "\nduality residuals");
    for row in &r.duality {
        let _ = writeln!(out, "  alpha = {:<6} {}", row.alpha, sci(row.residual));
    }
    let _ = writeln!(out, "\nfinite-horizon defects (x = e_11)");
    for row in &r.defects {
        let _ = writeln!(out, "  n = {:<3} {}", row.n, sci(row.defect));
    }
    out
}

pub fn cmd_analyze(dil: &TensorDilation, opts: &AnalyzeOptions, out: OutFormat) -> CliResult<Outcome> {
    let report = match analyze(dil, opts) {
        Ok(r) => r,
        Err(CliError::Validation(reason)) if validate(dil).is_err() => return Ok(partial_validation(dil, reason, out)),
        Err(e) => return Err(e),
    };
    let stdout = match out {
        OutFormat::Json => json(&report),
        OutFormat::Csv => bounds_csv(&report.bounds),
        OutFormat::Text => analysis_text(&report),
    };
    let code = if report.validation.pass { exit::OK } else { exit::VALIDATION };
    Ok(Outcome { code, stdout })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalRow {
    pub n: usize,
    pub exact_nonsync: f64,
    /// Only for colorings with the three-state structure.
    pub binomial_sum: Option<f64>,
    pub closed_form: f64,
    pub mixing_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub n_max: usize,
    pub max_abs_diff: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalReport {
    pub rate: f64,
    pub synchronizable: bool,
    pub three_state_structure: bool,
    pub rows: Vec<ClassicalRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
    /// `binomial_sum` against `2·rateⁿ`, three-state structure only.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sum_comparison: Vec<SumComparison>,
}

/// Same states, and colors matching the three-state example one-to-one in
/// map and probability (up to relabeling of colors).
pub fn has_three_state_structure(rc: &RoadColoring) -> bool {
    let reference = three_state_coloring();
    if rc.num_states() != 3 || rc.colors().len() != 3 {
        return false;
    }
    let mut used = [false; 3];
    for (g, &p) in reference.gamma().iter().zip(reference.nu()) {
        let hit = (0..3).find(|&c| !used[c] && rc.gamma()[c] == *g && (rc.nu()[c] - p).abs() <= 1e-12);
        match hit {
            Some(c) => used[c] = true,
            None => return false,
        }
    }
    true
}

pub const ORACLE_TOL: f64 = 1e-12;

pub fn classical(rc: &RoadColoring, n_max: usize, enumerate_max: Option<usize>) -> CliResult<ClassicalReport> {
    let sync = sync_report(rc, n_max);
    let mixing = classical_mixing_series(rc, n_max);
    let three = has_three_state_structure(rc);
    let rows = (0..=n_max)
        .map(|n| ClassicalRow {
            n,
            exact_nonsync: sync.exact_nonsync[n],
            binomial_sum: three.then(|| alternating_sum_bound(n).0),
            closed_form: sync.closed_form[n],
            mixing_bound: mixing[n],
        })
        .collect();
    let oracle = match enumerate_max {
        Some(m) => {
            let m = m.min(n_max);
            let mut worst = 0.0_f64;
            for n in 0..=m {
                worst = worst.max((nonsync_enumeration_oracle(rc, n)? - sync.exact_nonsync[n]).abs());
            }
            Some(OracleCheck { n_max: m, max_abs_diff: worst, agree: worst <= ORACLE_TOL })
        }
        None => None,
    };
    let sum_comparison = if three { qmc_core::classical::alternating_sum_report(n_max) } else { Vec::new() };
    Ok(ClassicalReport { rate: sync.rate, synchronizable: sync.synchronizable, three_state_structure: three, rows, oracle, sum_comparison })
}

pub const CLASSICAL_HEADER: &str = "n,exact_nonsync,binomial_sum,closed_form,mixing_bound";

pub fn classical_csv(r: &ClassicalReport) -> String {
    let mut out = format!("{CLASSICAL_HEADER}\n");
    for row in &r.rows {
        out.push_str(&csv_line(&[
            row.n.to_string(),
            sci(row.exact_nonsync),
            row.binomial_sum.map(sci).unwrap_or_default(),
            sci(row.closed_form),
            sci(row.mixing_bound),
        ]));
        out.push('\n');
    }
    out
}

fn classical_text(r: &ClassicalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rate (subdominant modulus)  {}", sci(r.rate));
    let _ = writeln!(out, "synchronizable              {}", r.synchronizable);
    if let Some(o) = &r.oracle {
        let _ = writeln!(
            out,
            "enumeration oracle          n <= {}: max |diff| = {}, agree = {}",
            o.n_max,
            sci(o.max_abs_diff),
            o.agree
        );
    }
    if !r.sum_comparison.is_empty() {
        let fails: Vec<usize> = r.sum_comparison.iter().filter(|c| c.n >= 2 && !c.holds).map(|c| c.n).collect();
        let _ = match fails.first() {
            None => writeln!(out, "binomial_sum <= 2 rate^n    holds for 2 <= n <= {}", r.rows.len().saturating_sub(1)),
            Some(first) => writeln!(out, "binomial_sum <= 2 rate^n    fails for {} of the n >= 2 checked, first at n = {first}", fails.len()),
        };
    }
    let _ = write!(out, "\n{}", classical_csv(r));
    out
}

pub fn cmd_classical(rc: &RoadColoring, n_max: usize, enumerate_max: Option<usize>, out: OutFormat) -> CliResult<Outcome> {
    let report = classical(rc, n_max, enumerate_max)?;
    let stdout = match out {
        OutFormat::Json => json(&report),
        OutFormat::Csv => classical_csv(&report),
        OutFormat::Text => classical_text(&report),
    };
    Ok(Outcome { code: exit::OK, stdout })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defect_horizon_respects_guard() {
        assert_eq!(safe_defect_horizon(3, 2), 10);
        assert_eq!(safe_defect_horizon(2, 2), 11);
        assert_eq!(safe_defect_horizon(4096, 2), 0);
        assert_eq!(safe_defect_horizon(2, 1), usize::MAX);
    }

    #[test]
    fn three_state_structure_is_label_free() {
        assert!(has_three_state_structure(&three_state_coloring()));
        let rc = RoadColoring::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["up".into(), "stay".into(), "down".into()],
            vec![vec![1, 2, 2], vec![0, 1, 2], vec![0, 0, 1]],
            vec![1. / 6., 1. / 2., 1. / 3.],
        )
        .unwrap();
        assert!(has_three_state_structure(&rc));
        let other = RoadColoring::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["up".into(), "stay".into(), "down".into()],
            vec![vec![1, 2, 2], vec![0, 1, 2], vec![0, 0, 1]],
            vec![1. / 3., 1. / 2., 1. / 6.],
        )
        .unwrap();
        assert!(!has_three_state_structure(&other));
    }
}
