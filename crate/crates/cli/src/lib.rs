//! Library behind the `sosc` command line tool: cross-view
//! fault-model validation and Monte Carlo loss measurement. The
//! subcommand surface itself lives in the binary.

pub mod analysis;
pub mod loss;

pub use analysis::validate_fault_model;
pub use loss::{monte_carlo_loss, LossError, LossOptions, LossReport};
