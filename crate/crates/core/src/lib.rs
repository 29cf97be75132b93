//! Coupling-based mixing certificates for quantum Markov chains on full
//! matrix algebras, and for road-colored classical chains.
//!
//! The quantum pipeline starts from a tensor dilation `T(x) = (Id ⊗ ψ)(u*(x ⊗ 1)u)`,
//! builds its diagonal coupling on `M_d ⊗ M_d'`, decides asymptotic
//! completeness from the fixed space of the extended dual transition
//! operator, and turns the iterates of the diagonal projection into an
//! explicit exponential bound on `‖φ₁∘Tⁿ − φ₂∘Tⁿ‖`.

pub mod classical;
pub mod diagonal;
pub mod dilation;
pub mod error;
pub mod fixtures;
pub mod quantum;
pub mod random;
pub mod scattering;
pub mod tensor;

pub use error::{Error, Result};
pub use quantum::{KrausChannel, State, Superoperator};
pub use num_complex::Complex64;
pub use tensor::ComplexMatrix;
