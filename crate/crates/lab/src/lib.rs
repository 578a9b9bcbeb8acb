//! Experiment orchestration for the radial NLKG lab: configuration, runners and reports.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ConfigError, Experiment, ExperimentConfig};
pub use experiments::run;
pub use report::{Report, Row, RunError};
