//! Library side of the `qmc` command line tool: file schemas, report
//! assembly and the reproduction table. `main.rs` only parses arguments.

pub mod commands;
pub mod error;
pub mod format;
pub mod input;
pub mod reproduce;

pub use commands::{OutFormat, Outcome};
pub use error::{exit, CliError, CliResult};

/// Qutrit dilation in environment-major ordering, with its invariant state.
pub const QUTRIT_DILATION_JSON: &str = include_str!("../fixtures/qutrit_dilation.json");
/// Three states, three colors with probabilities 1/3, 1/2, 1/6.
pub const THREE_STATE_COLORING_JSON: &str = include_str!("../fixtures/three_state_coloring.json");
/// `u = I` on `C² ⊗ C²`.
pub const IDENTITY_DILATION_JSON: &str = include_str!("../fixtures/identity_dilation.json");
