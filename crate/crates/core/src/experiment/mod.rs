//! Configured experiments: each writes deterministic CSV files, a manifest
//! with SHA-256 checksums, and a list of pass/fail checks.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
//! (blow-up, quadrature accuracy), 3 a check failed.

mod config;
mod data;
mod manifest;
mod physics;
mod sweeps;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::kernel::KernelError;
use crate::littlewood_paley::LpError;
use crate::par::Exec;
use crate::semigroup::SemigroupError;
use crate::solver::SolverError;

pub use config::{
    AuditSection, ConvergeSection, DataKind, DataSection, EnergySection, Experiment, ExperimentConfig, KernelSection,
    StabilitySection, StrichartzSection, Tolerances,
};
pub use data::{initial_datum, mixed_datum, vortex_pair};
pub use manifest::{sha256_hex, OutputEntry, RunManifest, MANIFEST_FILE};
pub use physics::{ConvergeRow, EnergySummaryRow, StabilityRow};
pub use sweeps::{AuditGridRow, HtildeRow, KernelSupRow};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 2,
        }
    }

    /// Short class name for CSV status columns.
    pub fn class(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Numerical(_) => "numerical",
            Self::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for ExperimentError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<SolverError> for ExperimentError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(_) | SolverError::Format(_) | SolverError::Spectral(_) => Self::Config(e.to_string()),
            SolverError::Semigroup(s) => s.into(),
            SolverError::Io(_) => Self::Io(e.to_string()),
            SolverError::BlowUp { .. } | SolverError::Audit { .. } => Self::Numerical(e.to_string()),
        }
    }
}

impl From<SemigroupError> for ExperimentError {
    fn from(e: SemigroupError) -> Self {
        match e {
            SemigroupError::Fit(_) => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<KernelError> for ExperimentError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Config(_) => Self::Config(e.to_string()),
            KernelError::Accuracy { .. } => Self::Numerical(e.to_string()),
        }
    }
}

impl From<LpError> for ExperimentError {
    fn from(e: LpError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<crate::fit::FitError> for ExperimentError {
    fn from(e: crate::fit::FitError) -> Self {
        Self::Numerical(e.to_string())
    }
}

/// A named pass/fail criterion with the measured value and its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: String,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= bound,
            value,
            bound: format!("<= {bound}"),
        }
    }

    pub fn within(name: &str, value: f64, [lo, hi]: [f64; 2]) -> Self {
        Self {
            name: name.into(),
            passed: (lo..=hi).contains(&value),
            value,
            bound: format!("in [{lo}, {hi}]"),
        }
    }

    /// `value` counts the offending entries.
    pub fn holds(name: &str, violations: usize, what: &str) -> Self {
        Self {
            name: name.into(),
            passed: violations == 0,
            value: violations as f64,
            bound: what.into(),
        }
    }
}

/// Everything a run produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// Output files relative to the run directory, in creation order.
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
    /// Ladder points that failed numerically, with their error.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// CSV writer that records every file it creates.
pub(crate) struct Sink<'a> {
    dir: &'a Path,
    outcome: &'a mut Outcome,
}

impl<'a> Sink<'a> {
    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), ExperimentError> {
        let file = fs::File::create(self.dir.join(name))?;
        crate::kernel::write_csv(rows, std::io::BufWriter::new(file))?;
        self.outcome.files.push(PathBuf::from(name));
        Ok(())
    }

    pub fn outcome(&mut self) -> &mut Outcome {
        self.outcome
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub outcome: Outcome,
    pub manifest: PathBuf,
}

impl RunSummary {
    /// 2 when a ladder point failed numerically, 3 when a check failed, else 0.
    pub fn exit_code(&self) -> i32 {
        if !self.outcome.failures.is_empty() {
            2
        } else if self.outcome.checks.iter().any(|c| !c.passed) {
            3
        } else {
            0
        }
    }
}

/// Runs the configured experiment into `cfg.output_dir` and writes the manifest.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<RunSummary, ExperimentError> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let started = chrono::Utc::now();
    let mut outcome = Outcome::default();
    let mut sink = Sink {
        dir: &dir,
        outcome: &mut outcome,
    };
    match cfg.experiment {
        Experiment::Energy => physics::energy(cfg, &mut sink, exec)?,
        Experiment::Converge => physics::converge(cfg, &mut sink, exec)?,
        Experiment::Stability => physics::stability(cfg, &mut sink, exec)?,
        Experiment::Kernel => sweeps::kernel(cfg, &mut sink, exec)?,
        Experiment::Strichartz => sweeps::strichartz(cfg, &mut sink, exec)?,
        Experiment::LpAudit => sweeps::lp_audit(cfg, &mut sink, exec)?,
    }
    let finished = chrono::Utc::now();
    let manifest = RunManifest::build(cfg, &dir, &outcome, started, finished)?;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_toml())?;
    Ok(RunSummary {
        experiment: cfg.experiment,
        outcome,
        manifest: path,
    })
}

#[cfg(test)]
mod tests;
