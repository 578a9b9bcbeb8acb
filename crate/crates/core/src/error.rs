use thiserror::Error;

use crate::evolution::TrajectoryRecord;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("virial index not admissible: {0}")]
    Constraint(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("no ground state found: {0}")]
    NoGroundState(String),
    #[error("lambda projection failed: {0}")]
    Projection(String),
    #[error("descent stagnated after {iterations} iterations (last change {last_change:e})")]
    Stagnation { iterations: usize, last_change: f64 },
    #[error("inconsistent margin: {0}")]
    Inconsistency(String),
    #[error("monitor failed at t = {t}: {message}")]
    Monitor { t: f64, message: String, partial: Box<TrajectoryRecord> },
    #[error("audit resolution: {0}")]
    AuditResolution(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
