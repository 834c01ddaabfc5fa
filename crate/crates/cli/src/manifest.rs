//! Run manifests: enough provenance for bit-exact replay.
//!
//! The manifest embeds the full parsed configuration, its SHA-256 over the
//! canonical JSON encoding, and the list of produced files. The loader
//! refuses a manifest whose embedded config no longer matches its hash.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use levyglass::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    /// Output files (relative to the manifest directory), excluding the
    /// manifest itself.
    pub outputs: Vec<String>,
    /// Unix seconds; informational only, excluded from replay comparison.
    pub created_unix: u64,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl RunManifest {
    pub fn new(config: ExperimentConfig, outputs: Vec<String>) -> Self {
        let config_hash = config_hash(&config);
        RunManifest {
            tool: "levyglass".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            config,
            config_hash,
            outputs,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf, Error> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Input(format!("manifest serialization: {e}")))?;
        fs::write(&path, text).map_err(|e| Error::Input(format!("write {path:?}: {e}")))?;
        Ok(path)
    }

    /// Load and verify the embedded config against its stored hash.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Input(format!("read {path:?}: {e}")))?;
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("manifest parse error: {e}")))?;
        let recomputed = config_hash(&manifest.config);
        if recomputed != manifest.config_hash {
            return Err(Error::Input(format!(
                "config hash mismatch: manifest says {}, config hashes to {recomputed}",
                manifest.config_hash
            )));
        }
        Ok(manifest)
    }
}
