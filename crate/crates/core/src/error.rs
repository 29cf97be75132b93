use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("negative power of a singular matrix")]
    SingularNegativePower,

    #[error("matrix is not an orthogonal projection (deviation {0:.3e})")]
    NotAProjection(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("channel is not unital (deviation {0:.3e})")]
    NotUnital(f64),

    #[error("invalid convex weights: {0}")]
    InvalidWeights(String),

    #[error("no invariant state available for modular checks: {0}")]
    MissingInvariantState(String),

    #[error("state is not invariant under the dilation (isometry defect {0:.3e})")]
    NotInvariant(f64),

    #[error("iterates of the diagonal projection never became strictly positive up to n = {0}")]
    NotStrictlyPositive(usize),

    #[error("horizon too large: {0}")]
    HorizonTooLarge(String),

    #[error("unknown color label {0:?}")]
    UnknownColor(String),

    #[error("invalid road coloring: {0}")]
    InvalidColoring(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
