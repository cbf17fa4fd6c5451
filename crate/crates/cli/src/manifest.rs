use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_error, CliError};

/// Provenance record written next to a command's primary output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seeds: Vec<u64>,
    pub tool_version: &'static str,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// Collects the inputs that determine a run and times it.
pub struct Run {
    command: &'static str,
    hasher: Sha256,
    seeds: Vec<u64>,
    outputs: Vec<String>,
    started: Instant,
}

impl Run {
    pub fn start(command: &'static str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Self { command, hasher, seeds: Vec::new(), outputs: Vec::new(), started: Instant::now() }
    }

    /// Folds a labelled input into the digest.
    pub fn input(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn settings(&mut self, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_vec(value)?;
        self.input("settings", &text);
        Ok(())
    }

    pub fn seed(&mut self, seed: u64) {
        self.seeds.push(seed);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `<anchor>.manifest.json`.
    pub fn finish(self, anchor: &Path) -> Result<PathBuf, CliError> {
        let digest = self.hasher.finalize();
        let manifest = RunManifest {
            command: self.command.into(),
            config_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seeds: self.seeds,
            tool_version: env!("CARGO_PKG_VERSION"),
            outputs: self.outputs,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let mut name = anchor.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| io_error(&path, e))?;
        Ok(path)
    }
}
