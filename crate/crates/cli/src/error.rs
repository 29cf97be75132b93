use thiserror::Error;

use qmc_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const GUARD: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },

    /// Malformed JSON, missing fields or inconsistent shapes.
    #[error("{0}")]
    Input(String),

    /// Well-formed input describing an invalid object.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A computation refused to run (size guard or numerical breakdown).
    #[error("{0}")]
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Input(_) => exit::INPUT,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Guard(_) => exit::GUARD,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::HorizonTooLarge(_) | CoreError::Numerical(_) => CliError::Guard(e.to_string()),
            CoreError::DimensionMismatch(_) | CoreError::UnknownColor(_) => CliError::Input(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
