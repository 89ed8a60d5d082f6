use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything needed to re-run a command and get byte-identical outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    /// Input path → SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], config: serde_json::Value, seeds: Vec<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            args: args.to_vec(),
            config,
            seeds,
            inputs: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs
            .insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).map_err(labelnoise::Error::from)?;
        write_atomic(path, format!("{json}\n").as_bytes())
    }

    /// Fails if any recorded input no longer hashes to its recorded digest.
    pub fn check_inputs(&self) -> Result<(), CliError> {
        for (path, digest) in &self.inputs {
            let bytes = fs::read(path).map_err(|e| CliError::io(Path::new(path), e))?;
            if &sha256_hex(&bytes) != digest {
                return Err(CliError::Input(format!(
                    "{path}: contents changed since the manifest was written"
                )));
            }
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = PathBuf::from(path);
    let name = format!(
        ".{}.tmp{}",
        path.file_name()
            .map(|n| n.to_string_lossy())
            .unwrap_or_default(),
        std::process::id()
    );
    tmp.set_file_name(name);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// `out.csv` → `out.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
