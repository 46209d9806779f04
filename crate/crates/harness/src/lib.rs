//! Experiment orchestration, file formats and command-line plumbing around
//! [`loolsm_core`].

pub mod config;
pub mod error;
pub mod experiment;
pub mod pathio;
pub mod reference;
pub mod report;
pub mod seed;

pub use config::{ExperimentConfig, Scale};
pub use error::{HarnessError, Result};
pub use experiment::{generate_pool, run_experiment1, run_experiment2};
pub use report::{emit_csv, fit_bias_slope, parse_csv, ExperimentReport, Record, SlopeFit, SlopePoint};
