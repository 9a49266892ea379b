use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::atomic::write_atomic;
use crate::error::IoResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    /// Finished with every invariant column in bounds.
    Passed,
    /// Finished, but some ledger column broke its bound.
    Violated,
    /// Invalid configuration or a step that failed after all retries.
    Failed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Passed => 0,
            RunStatus::Violated => 1,
            RunStatus::Failed => 3,
            RunStatus::Running => 4,
        }
    }
}

/// Record of one run. Paths are relative to the output directory; the wall
/// times are the only non-deterministic entries of a run's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Normalized configuration, or the raw text if it did not parse.
    pub config: serde_json::Value,
    pub version: String,
    pub started_unix_s: f64,
    pub finished_unix_s: Option<f64>,
    pub ledger: Option<String>,
    pub chart: Option<String>,
    pub snapshots: Vec<String>,
    pub steps: usize,
    pub status: RunStatus,
    /// Name of the first violated ledger column.
    pub violated_column: Option<String>,
    pub message: Option<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(config: serde_json::Value) -> Self {
        Self {
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: unix_now(),
            finished_unix_s: None,
            ledger: None,
            chart: None,
            snapshots: Vec::new(),
            steps: 0,
            status: RunStatus::Running,
            violated_column: None,
            message: None,
        }
    }

    pub fn finish(&mut self, status: RunStatus, message: Option<String>) {
        self.status = status;
        self.message = message;
        self.finished_unix_s = Some(unix_now());
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> IoResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifests always serialize");
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn read(dir: &Path) -> IoResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text =
            std::fs::read_to_string(&path).map_err(|source| crate::IoError::Read { path: path.clone(), source })?;
        serde_json::from_str(&text).map_err(|e| crate::IoError::config(path.display().to_string(), e.to_string()))
    }
}
