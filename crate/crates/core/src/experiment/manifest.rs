use std::fs;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{Check, ExperimentConfig, ExperimentError, Outcome};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of one run. Only the timestamps differ between reruns of the same
/// configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub experiment: String,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub failures: Vec<String>,
    pub outputs: Vec<OutputEntry>,
    pub checks: Vec<Check>,
    pub config: ExperimentConfig,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub(crate) fn build(
        cfg: &ExperimentConfig,
        dir: &Path,
        outcome: &Outcome,
        started: DateTime<Utc>,
        finished: DateTime<Utc>,
    ) -> Result<Self, ExperimentError> {
        let outputs = outcome
            .files
            .iter()
            .map(|f| {
                let bytes = fs::read(dir.join(f))?;
                Ok(OutputEntry {
                    file: f.display().to_string(),
                    sha256: sha256_hex(&bytes),
                    bytes: bytes.len() as u64,
                })
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        Ok(Self {
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            experiment: cfg.experiment.name().into(),
            seed: cfg.seed,
            started: started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished: finished.to_rfc3339_opts(SecondsFormat::Millis, true),
            failures: outcome.failures.clone(),
            outputs,
            checks: outcome.checks.clone(),
            config: cfg.clone(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is always serializable")
    }
}
