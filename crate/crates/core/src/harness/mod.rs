//! Config-driven experiment runner.

pub mod config;
pub mod output;
pub mod runner;
pub mod slope;

pub use config::{load_config, parse_config, ExperimentConfig, NamedLearner, Scenario, Tolerances};
pub use output::{emit_results, read_csv, read_json, to_csv_string, OutputFormat, CSV_COLUMNS};
pub use runner::{run_experiment, run_scenario, ResultRow};
pub use slope::{fit_slope, SlopeFit};
