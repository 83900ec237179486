//! Configured verification campaigns over the `mhdlab` library: each
//! experiment produces a JSON report, a text summary and CSV tables.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::run_experiment;
pub use output::{Outcome, RunReport, Table};
