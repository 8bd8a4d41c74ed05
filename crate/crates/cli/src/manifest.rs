//! Run manifest written next to every CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Output;
use crate::error::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    /// Directory that relative paths in the config resolve against.
    pub config_dir: PathBuf,
    pub config_text: String,
    pub output: OutputFile,
    /// Module that produced each quantity.
    pub provenance: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

pub struct ConfigSource {
    pub text: String,
    pub base_dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Reads a TOML config, or the embedded config of a manifest (`.json`).
pub fn load_source(path: &Path) -> Result<ConfigSource, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("manifest {}: {e}", path.display())))?;
        return Ok(ConfigSource { text: m.config_text, base_dir: m.config_dir });
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let base_dir = std::fs::canonicalize(&base_dir).unwrap_or(base_dir);
    Ok(ConfigSource { text, base_dir })
}

impl Manifest {
    pub fn new(command: &str, source: &ConfigSource, seed: Option<u64>, started: f64, csv: &Path, output: &Output) -> Result<Self, CliError> {
        let bytes = std::fs::read(csv)?;
        let provenance = output.rows.iter().map(|r| (r.quantity.clone(), r.source.clone())).collect();
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_sha256: sha256_hex(source.text.as_bytes()),
            seed,
            threads: rayon::current_num_threads(),
            started_unix: started,
            finished_unix: unix_now(),
            config_dir: source.base_dir.clone(),
            config_text: source.text.clone(),
            output: OutputFile {
                file: csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_hex(&bytes),
                rows: output.rows.len(),
            },
            provenance,
            warnings: output.warnings.clone(),
        })
    }
}
