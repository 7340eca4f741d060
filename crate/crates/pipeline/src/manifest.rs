//! Run manifests: the configuration snapshot, seed and versions behind each command.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::checkpoint::CHECKPOINT_FORMAT;
use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    /// `--set` overrides in the order given.
    pub overrides: Vec<(String, String)>,
    pub versions: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &RunConfig, overrides: &[(String, String)]) -> Self {
        let versions = [("fptc", env!("CARGO_PKG_VERSION")), ("checkpoint_format", CHECKPOINT_FORMAT)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self {
            command: command.to_string(),
            seed: cfg.seed,
            config: cfg.entries().into_iter().collect(),
            overrides: overrides.to_vec(),
            versions,
        }
    }

    pub fn file_name(&self) -> String {
        format!("manifest-{}.json", self.command)
    }

    /// Writes the manifest into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(self.file_name());
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
