//! Experiment harness for the `mrdg-core` solver: configuration, example setups,
//! convergence tables and CSV artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod table;

pub use config::{Example, GridKind, RunConfig};
pub use error::{exit, CliError};
pub use experiment::{run_experiment, run_experiment_with, Outcome, Status};
