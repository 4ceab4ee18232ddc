//! Load-stepping driver for the notched tension benchmark.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{RunConfig, SolverChoice};
pub use error::BenchError;
pub use run::{run_experiment, RunSummary, StepRecord, StepStatus};
