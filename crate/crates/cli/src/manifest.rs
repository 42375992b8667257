use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Command;

/// Sidecar written next to every output file. `parameters` is the complete
/// subcommand invocation, so `replay` can rerun it verbatim.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Command,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_secs: f64,
    pub output: PathBuf,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(command: &Command, wall_time: Duration, output: &Path, bytes: &[u8]) -> Self {
        Self {
            subcommand: command.name().to_string(),
            parameters: command.clone(),
            seed: command.seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: wall_time.as_secs_f64(),
            output: output.to_path_buf(),
            sha256: sha256_hex(bytes),
        }
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write(&self) -> std::io::Result<PathBuf> {
        let path = Self::path_for(&self.output);
        fs::write(&path, serde_json::to_vec_pretty(self)?)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
