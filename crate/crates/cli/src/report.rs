use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const FROZEN_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 over the command, its parameters, the resolved configuration
    /// and the contents of every input file.
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &Value, seed: u64, frozen_time: bool) -> Result<Self> {
        let canonical = serde_json::to_vec(&serde_json::json!({
            "command": command,
            "parameters": parameters,
        }))?;
        let timestamp = if frozen_time {
            FROZEN_TIMESTAMP.to_owned()
        } else {
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        };
        Ok(Self {
            command: command.to_owned(),
            config_digest: hex::encode(Sha256::digest(&canonical)),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp,
        })
    }
}

/// Hex SHA-256 of raw input bytes.
pub fn content_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub report: Value,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}
