//! Run manifests: every command records what it ran, when, and a content
//! digest of every file it produced, so any published number can be
//! regenerated from the manifest alone.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use memwalk::Parameters;

#[derive(Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub params: Option<Parameters>,
    pub seed: Option<u64>,
    pub record_times: Option<Vec<u64>>,
    pub tool_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub outputs: Vec<OutputFile>,
}

pub fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            params: None,
            seed: None,
            record_times: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: unix_ms(),
            finished_unix_ms: 0,
            outputs: Vec::new(),
        }
    }

    /// Digests a produced file and records it.
    pub fn add_output(&mut self, path: &Path) -> anyhow::Result<()> {
        let data = std::fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&data);
        self.outputs.push(OutputFile {
            path: path.display().to_string(),
            bytes: data.len() as u64,
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    /// Stamps the end time and writes `<command>_manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> anyhow::Result<PathBuf> {
        self.finished_unix_ms = unix_ms();
        let path = dir.join(format!("{}_manifest.json", self.command));
        crate::output::write_json(&path, &self)?;
        Ok(path)
    }
}
