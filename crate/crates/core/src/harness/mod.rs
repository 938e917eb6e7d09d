//! Experiment configuration, CSV output and the reproduction drivers used by the CLI.

pub mod check;
pub mod config;
pub mod csv;
pub mod rosenbrock;
pub mod superlinear;
pub mod table1;

pub use config::{parse_config, parse_config_str, ExperimentConfig};
