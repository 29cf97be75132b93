//! JSON file schemas for dilations and road colorings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use qmc_core::classical::RoadColoring;
use qmc_core::dilation::TensorDilation;
use qmc_core::tensor::{c64, diag_real, permute_factors, FactorShape};
use qmc_core::{ComplexMatrix, State};

use crate::error::{CliError, CliResult};

/// A complex entry: `[re, im]` or a bare real number.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> qmc_core::Complex64 {
        match self {
            Entry::Pair([re, im]) => c64(re, im),
            Entry::Real(re) => c64(re, 0.0),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Diag { diag: Vec<f64> },
    Full(Vec<Vec<Entry>>),
}

impl MatrixSpec {
    fn to_matrix(&self, n: usize, field: &str) -> CliResult<ComplexMatrix> {
        match self {
            MatrixSpec::Diag { diag } => {
                if diag.len() != n {
                    return Err(CliError::Input(format!("{field}.diag: expected {n} entries, found {}", diag.len())));
                }
                Ok(diag_real(diag))
            }
            MatrixSpec::Full(rows) => matrix_from_rows(rows, n, field),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Basis index `i·c + k` for system index `i`, environment index `k`.
    SystemEnvironment,
    /// Basis index `k·d + i`; factors are swapped on load.
    EnvironmentSystem,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationSpec {
    pub d: usize,
    pub c: usize,
    pub u: Vec<Vec<Entry>>,
    pub psi: MatrixSpec,
    #[serde(default)]
    pub phi: Option<MatrixSpec>,
    pub ordering: Ordering,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Label(String),
    Index(usize),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringSpec {
    pub states: Vec<String>,
    pub colors: Vec<String>,
    pub gamma: BTreeMap<String, Vec<Target>>,
    pub nu: BTreeMap<String, f64>,
}

fn matrix_from_rows(rows: &[Vec<Entry>], n: usize, field: &str) -> CliResult<ComplexMatrix> {
    if rows.len() != n {
        return Err(CliError::Input(format!("{field}: expected {n} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Input(format!("{field}[{i}]: expected {n} entries, found {}", row.len())));
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}

/// Deserializes with the JSON path of the failing field and its line and
/// column in the diagnostic.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = if path == "." || path == "?" { String::new() } else { format!(" at field `{path}`") };
        CliError::Input(format!("{origin}: {}{at} (line {}, column {})", classify(&inner), inner.line(), inner.column()))
    })
}

fn classify(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    // serde_json appends its own position; keep only the message
    match msg.rfind(" at line ") {
        Some(cut) => msg[..cut].to_string(),
        None => msg,
    }
}

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

impl DilationSpec {
    /// Builds the dilation with system-major ordering. Only shapes and the
    /// states are checked here; unitarity and invariance are left to
    /// validation.
    pub fn build(&self) -> CliResult<TensorDilation> {
        let (d, c) = (self.d, self.c);
        if d == 0 || c == 0 {
            return Err(CliError::Input("d and c must be positive".into()));
        }
        let u = matrix_from_rows(&self.u, d * c, "u")?;
        let u = match self.ordering {
            Ordering::SystemEnvironment => u,
            Ordering::EnvironmentSystem => permute_factors(&u, &FactorShape::new([c, d])?, &[1, 0])?,
        };
        let psi = State::new(self.psi.to_matrix(c, "psi")?).map_err(|e| CliError::Validation(format!("psi: {e}")))?;
        let phi = match &self.phi {
            Some(spec) => Some(State::new(spec.to_matrix(d, "phi")?).map_err(|e| CliError::Validation(format!("phi: {e}")))?),
            None => None,
        };
        Ok(TensorDilation::new_unchecked(u, psi, phi)?)
    }
}

impl ColoringSpec {
    pub fn build(&self) -> CliResult<RoadColoring> {
        let state_index = |t: &Target, color: &str, pos: usize| -> CliResult<usize> {
            match t {
                Target::Index(i) if *i < self.states.len() => Ok(*i),
                Target::Index(i) => Err(CliError::Input(format!("gamma.{color}[{pos}]: state index {i} out of range"))),
                Target::Label(l) => self
                    .states
                    .iter()
                    .position(|s| s == l)
                    .ok_or_else(|| CliError::Input(format!("gamma.{color}[{pos}]: unknown state {l:?}"))),
            }
        };
        let mut gamma = Vec::with_capacity(self.colors.len());
        let mut nu = Vec::with_capacity(self.colors.len());
        for color in &self.colors {
            let targets = self
                .gamma
                .get(color)
                .ok_or_else(|| CliError::Input(format!("gamma: missing color {color:?}")))?;
            if targets.len() != self.states.len() {
                return Err(CliError::Input(format!(
                    "gamma.{color}: expected {} targets, found {}",
                    self.states.len(),
                    targets.len()
                )));
            }
            gamma.push(
                targets
                    .iter()
                    .enumerate()
                    .map(|(pos, t)| state_index(t, color, pos))
                    .collect::<CliResult<Vec<_>>>()?,
            );
            nu.push(*self.nu.get(color).ok_or_else(|| CliError::Input(format!("nu: missing color {color:?}")))?);
        }
        for key in self.gamma.keys().chain(self.nu.keys()) {
            if !self.colors.contains(key) {
                return Err(CliError::Input(format!("undeclared color {key:?}")));
            }
        }
        RoadColoring::new(self.states.clone(), self.colors.clone(), gamma, nu)
            .map_err(|e| CliError::Validation(e.to_string()))
    }
}

pub fn load_dilation(path: &Path) -> CliResult<TensorDilation> {
    dilation_from_str(&read_file(path)?, &path.display().to_string())
}

pub fn dilation_from_str(text: &str, origin: &str) -> CliResult<TensorDilation> {
    parse_json::<DilationSpec>(text, origin)?.build()
}

pub fn load_coloring(path: &Path) -> CliResult<RoadColoring> {
    coloring_from_str(&read_file(path)?, &path.display().to_string())
}

pub fn coloring_from_str(text: &str, origin: &str) -> CliResult<RoadColoring> {
    parse_json::<ColoringSpec>(text, origin)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_name_the_field() {
        let err = dilation_from_str(r#"{"d": 1, "c": 1, "u": [[1]], "psi": {"diag": [1]}, "ordering": "sideways"}"#, "x")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ordering") && msg.contains("line 1"), "{msg}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn ordering_is_required() {
        let err = dilation_from_str(r#"{"d": 1, "c": 1, "u": [[1]], "psi": {"diag": [1]}}"#, "x").unwrap_err();
        assert!(err.to_string().contains("ordering"));
    }

    #[test]
    fn shape_errors() {
        let err = dilation_from_str(
            r#"{"d": 2, "c": 1, "u": [[1, 0]], "psi": {"diag": [1]}, "ordering": "system_environment"}"#,
            "x",
        )
        .unwrap_err();
        assert!(err.to_string().contains("expected 2 rows"));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn invalid_state_is_a_validation_failure() {
        let err = dilation_from_str(
            r#"{"d": 1, "c": 2, "u": [[1, 0], [0, 1]], "psi": {"diag": [0.5, 0.6]}, "ordering": "system_environment"}"#,
            "x",
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn coloring_accepts_labels_and_indices() {
        let rc = coloring_from_str(
            r#"{"states": ["a", "b"], "colors": ["x", "y"], "gamma": {"x": ["a", "a"], "y": [1, 1]}, "nu": {"x": 0.5, "y": 0.5}}"#,
            "x",
        )
        .unwrap();
        assert_eq!(rc.gamma(), &[vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn coloring_rejects_unknown_targets() {
        let err = coloring_from_str(
            r#"{"states": ["a"], "colors": ["x"], "gamma": {"x": ["b"]}, "nu": {"x": 1}}"#,
            "x",
        )
        .unwrap_err();
        assert!(err.to_string().contains("gamma.x[0]"));
    }
}
