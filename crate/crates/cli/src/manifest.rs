//! The run manifest: an audit record of everything a pipeline run wrote.
//!
//! Commands locate artifacts by convention under the output directory
//! (`metrics/`, `logs/`, `models/`, `exchanges.json`); the manifest is the
//! inventory that ties them to the plan digest and seed that produced them.
//! Reusing an output directory with a different plan is refused, since mixed
//! artifacts would silently corrupt later training runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Artifacts of one successful grid cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellArtifact {
    pub function: String,
    pub memory_mib: u32,
    pub concurrency: u32,
    /// Path of the metrics CSV, relative to the output directory.
    pub metrics_csv: String,
    /// Path of the load summary JSON, relative to the output directory.
    pub load_summary: String,
}

/// A grid cell that failed; the rest of the run is unaffected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    pub memory_mib: u32,
    pub concurrency: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the plan file bytes, hex encoded.
    pub plan_sha256: String,
    pub seed: u64,
    pub created_unix_ms: u64,
    pub updated_unix_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exchange_store: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellArtifact>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<CellFailure>,
    /// Model artifact paths per function, relative to the output directory.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub models: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<String>,
}

pub fn plan_digest(plan_bytes: &[u8]) -> String {
    let digest = Sha256::digest(plan_bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").expect("writing to a string cannot fail");
        s
    })
}

fn now_unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(plan_sha256: String, seed: u64) -> RunManifest {
        let now = now_unix_ms();
        RunManifest {
            plan_sha256,
            seed,
            created_unix_ms: now,
            updated_unix_ms: now,
            exchange_store: None,
            cells: Vec::new(),
            failures: Vec::new(),
            models: BTreeMap::new(),
            reports: Vec::new(),
        }
    }

    pub fn path_in(out: &Path) -> PathBuf {
        out.join(MANIFEST_FILE)
    }

    pub fn load(out: &Path) -> Result<Option<RunManifest>, CliError> {
        let path = Self::path_in(out);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        let manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        Ok(Some(manifest))
    }

    /// Load the manifest of `out`, or start a fresh one. An existing
    /// manifest produced from a different plan is a hard error.
    pub fn open_or_new(out: &Path, plan_sha256: &str, seed: u64) -> Result<RunManifest, CliError> {
        match Self::load(out)? {
            Some(mut manifest) => {
                if manifest.plan_sha256 != plan_sha256 {
                    return Err(CliError::validation(format!(
                        "{} holds artifacts from a different plan \
                         (digest {} vs {plan_sha256}); use a fresh --out",
                        out.display(),
                        manifest.plan_sha256,
                    )));
                }
                manifest.seed = seed;
                Ok(manifest)
            }
            None => Ok(RunManifest::new(plan_sha256.to_string(), seed)),
        }
    }

    pub fn save(&mut self, out: &Path) -> Result<(), CliError> {
        self.updated_unix_ms = now_unix_ms();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(Self::path_in(out), text + "\n")?;
        Ok(())
    }

    /// Every artifact path the manifest mentions, relative to the output
    /// directory. All of them must exist once a run completes.
    pub fn referenced_paths(&self) -> Vec<String> {
        let mut paths = Vec::new();
        if let Some(store) = &self.exchange_store {
            paths.push(store.clone());
        }
        for cell in &self.cells {
            paths.push(cell.metrics_csv.clone());
            paths.push(cell.load_summary.clone());
        }
        for artifacts in self.models.values() {
            paths.extend(artifacts.iter().cloned());
        }
        paths.extend(self.reports.iter().cloned());
        paths
    }
}
