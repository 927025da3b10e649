//! Batch front-end: scenario configs in, results.json and CSV out.

pub mod config;
pub mod output;
pub mod report;
pub mod run;

pub use config::{parse, ConfigError, Scenario};
pub use output::{Check, Results, TaskReport};
pub use run::{run_file, run_scenario, RunError, RunOutcome};
