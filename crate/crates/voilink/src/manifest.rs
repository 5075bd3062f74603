//! Run manifests.
//!
//! Every CLI run writes a `manifest.json` next to its artifacts recording
//! what was run (command, full configuration echo, effective seed), what
//! came out (artifact file names, validation warnings), and when. The
//! timestamp is the one intentionally non-reproducible field, so the
//! comparison helper strips it: two runs of the same command on the same
//! configuration and seed must match on everything else.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::AppConfig;
use crate::error::{Error, Result};

/// Record of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Subcommand that produced this directory.
    pub command: String,
    /// Effective root seed (after any command-line override).
    pub seed: u64,
    /// Full configuration the run used.
    pub config: AppConfig,
    /// Files the run wrote, relative to the manifest's directory.
    pub artifacts: Vec<String>,
    /// Validation warnings surfaced during the run.
    pub warnings: Vec<String>,
    /// Seconds since the Unix epoch at write time. Excluded from
    /// reproducibility comparisons.
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: AppConfig) -> Self {
        RunManifest {
            command: command.to_string(),
            seed,
            config,
            artifacts: Vec::new(),
            warnings: Vec::new(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Everything except the timestamp — the reproducible content.
    pub fn reproducible_content(&self) -> Result<serde_json::Value> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("timestamp_unix");
        }
        Ok(value)
    }

    /// True when two manifests describe the same run, timestamps aside.
    pub fn same_run(&self, other: &Self) -> Result<bool> {
        Ok(self.reproducible_content()? == other.reproducible_content()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifests_roundtrip_through_json() {
        let mut manifest = RunManifest::new("simulate", 42, AppConfig::default());
        manifest.artifacts.push("trace.csv".to_string());
        manifest.warnings.push("something mild".to_string());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        let back = RunManifest::load(&path).unwrap();
        assert_eq!(manifest, back);
    }

    #[test]
    fn timestamp_does_not_break_run_identity() {
        let mut a = RunManifest::new("train", 7, AppConfig::default());
        let mut b = RunManifest::new("train", 7, AppConfig::default());
        a.timestamp_unix = 1_000;
        b.timestamp_unix = 2_000;
        a.artifacts.push("actor.ckpt".to_string());
        b.artifacts.push("actor.ckpt".to_string());
        assert!(a.same_run(&b).unwrap());
        b.seed = 8;
        assert!(!a.same_run(&b).unwrap());
    }
}
