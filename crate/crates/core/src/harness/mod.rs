//! Experiment orchestration behind the command-line tool.

pub mod check;
pub mod config;
pub mod emit;
pub mod sweep;

pub use check::{run_checks, run_checks_with, CheckOutcome, CheckReport};
pub use config::{ConfigLayer, ExperimentConfig, OutputFormat, PowerSpec, SolverChoice, SolverKind};
pub use emit::{emit, write_records, CSV_HEADER};
pub use sweep::{run_sweep, trial_start, SweepRecord};
