//! Experiment driver for the `ma-lab-core` numerics: configuration files,
//! the experiments themselves, and their JSON, CSV and plot outputs.

pub mod config;
pub mod error;
pub mod experiments;
pub mod problems;
pub mod report;
pub mod runner;

pub use config::{emit_config, parse_config, Experiment, ExperimentConfig};
pub use error::LabError;
pub use experiments::run_experiment;
pub use report::{Assertion, ExperimentReport, Table};
