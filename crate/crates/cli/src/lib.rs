//! Command-line experiments: JSON config plus flag overrides in, CSV and a
//! JSON sidecar out.

// `!(x <= limit)` is used on purpose: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use error::CliError;
pub use experiments::{run_experiment, RunReport};
