//! Command implementations and the experiment harness behind the `pwt`
//! binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod experiment;
pub mod stats;

pub use error::{CliError, Result};
pub use experiment::{run_experiment, AlgorithmSpec, ExperimentConfig, ExperimentResults};
pub use stats::summarize;
