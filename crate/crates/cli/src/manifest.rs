use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance block embedded in every JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub input_digests: Vec<InputDigest>,
    pub tool_version: String,
    pub timestamp: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set, for reproducible builds of outputs.
fn run_timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0));
    fixed
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Input files read so far, with their digests.
#[derive(Debug, Default)]
pub struct Inputs {
    digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        self.digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn manifest<C: Serialize>(&self, command: &str, config: &C) -> RunManifest {
        let canonical = serde_json::to_vec(config).expect("configs serialize");
        RunManifest {
            command: command.to_string(),
            config_digest: sha256_hex(&canonical),
            input_digests: self.digests.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: run_timestamp(),
        }
    }
}

pub fn write_output(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
    text.push('\n');
    write_output(path, text.as_bytes())
}
