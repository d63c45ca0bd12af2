//! Run manifests: every command emits exactly one, recording the command
//! line, the seed, input file hashes, the outputs written, the tool version
//! and the wall time. Reruns with identical manifest inputs produce
//! byte-identical outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command_line: Vec<String>,
    pub seed: u64,
    pub input_hashes: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, seed: u64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line,
            seed,
            input_hashes: BTreeMap::new(),
            outputs: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn hash_input(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.input_hashes.insert(
            path.display().to_string(),
            format!("{:x}", hasher.finalize()),
        );
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Default manifest location: next to the first output.
    pub fn default_path(&self) -> PathBuf {
        let first = self
            .outputs
            .first()
            .cloned()
            .unwrap_or_else(|| "gff-lab-run".to_string());
        PathBuf::from(format!("{first}.manifest.json"))
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n")
    }
}
