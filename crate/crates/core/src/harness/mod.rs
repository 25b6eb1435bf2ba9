//! Configuration, experiment sweeps and CSV output.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{load_config, ExperimentConfig, ExperimentKind, SweepVariable};
pub use experiment::{run_experiment, ResultRow, ResultTable};
pub use output::{format_value, write_csv, write_metadata, RunMetadata};
