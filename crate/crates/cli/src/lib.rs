//! Experiment harness behind the `popsim` binary: single runs, sweeps with a
//! log-log fit, baseline processes, and exact verification.

pub mod error;
pub mod experiment;
pub mod output;

pub use error::{CliError, Result};
pub use experiment::{execute, Command, ExperimentSpec, Overrides, Process};
pub use output::Format;
