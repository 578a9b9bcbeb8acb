//! Experiment reports and the error classes behind the exit codes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use nlkg_core::monitors::{AuditReport, Status};
use nlkg_core::{LabError, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, Experiment, ExperimentConfig};

/// One pass/fail/info line of a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Row {
    /// Passes iff value ≤ tolerance.
    pub fn le(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let status = if value <= tolerance { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, value, tolerance, note: String::new() }
    }

    /// Passes iff value ≥ bound.
    pub fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let status = if value >= bound { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, value, tolerance: bound, note: String::new() }
    }

    pub fn flag(name: impl Into<String>, ok: bool, value: f64) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, value, tolerance: 0.0, note: String::new() }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), status: Status::Info, value, tolerance: 0.0, note: String::new() }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Summary of one evolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub key: String,
    pub verdict: Option<Verdict>,
    pub metrics: BTreeMap<String, f64>,
    /// Resolution multiplier of the run that produced this summary.
    pub resolution: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub experiment: Experiment,
    /// What the experiment exercises, in words.
    pub subject: String,
    pub passed: bool,
    pub checks: Vec<Row>,
    pub runs: Vec<RunSummary>,
    pub audits: BTreeMap<String, AuditReport>,
    pub constants: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
}

impl Report {
    pub fn new(config: &ExperimentConfig, subject: &str) -> Self {
        Self {
            experiment: config.experiment,
            subject: subject.into(),
            passed: false,
            checks: Vec::new(),
            runs: Vec::new(),
            audits: BTreeMap::new(),
            constants: BTreeMap::new(),
            config: config.clone(),
        }
    }

    /// Sorts runs by key and settles the overall status.
    pub fn finish(mut self) -> Self {
        self.runs.sort_by(|a, b| a.key.cmp(&b.key));
        self.passed = self.checks.iter().all(Row::passed) && self.runs.iter().all(|r| r.passed);
        self
    }

    pub fn check(&self, name: &str) -> Option<&Row> {
        self.checks.iter().find(|r| r.name == name)
    }

    /// Rows whose name starts with `prefix`.
    pub fn checks_with(&self, prefix: &str) -> Vec<&Row> {
        self.checks.iter().filter(|r| r.name.starts_with(prefix)).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Plain-text table of the checks.
    pub fn table(&self) -> String {
        let mut out = format!("{} ({})\n", self.experiment, self.subject);
        for r in &self.checks {
            let tag = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "INFO",
            };
            out.push_str(&format!("  {tag} {:<48} {:>14.6e}  tol {:.3e}", r.name, r.value, r.tolerance));
            if !r.note.is_empty() {
                out.push_str(&format!("  ({})", r.note));
            }
            out.push('\n');
        }
        out.push_str(if self.passed { "all checks pass\n" } else { "some checks FAIL\n" });
        out
    }
}

/// Failure to produce a report.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Lab(LabError),
}

impl RunError {
    /// 2 for configuration errors, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Lab(LabError::Domain(_) | LabError::Constraint(_)) => 2,
            RunError::Lab(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Lab(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<LabError> for RunError {
    fn from(e: LabError) -> Self {
        RunError::Lab(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Lab(LabError::Io(e))
    }
}
