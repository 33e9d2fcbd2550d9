//! Reproducible experiment runner for critical value function tests:
//! configuration, orchestration of calibration, size, power, surface and
//! limit studies, and CSV output.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiments;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
