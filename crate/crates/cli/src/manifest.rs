//! Run manifests written beside every artifact as `<output>.manifest`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FORMAT: &str = "myceliumsim/manifest/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    /// RFC 3339, UTC. Taken from `SOURCE_DATE_EPOCH` when it is set.
    pub timestamp: String,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub inputs: Vec<FileDigest>,
    #[serde(default)]
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digest(path: &Path) -> Result<FileDigest, CliError> {
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// `out` with `.manifest` appended to its final component.
pub fn manifest_path(out: &Path) -> PathBuf {
    // collecting components drops a trailing separator
    let clean: PathBuf = out.components().collect();
    let mut name = OsString::from(clean.as_os_str());
    name.push(".manifest");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn new(command: &[String], seeds: Vec<u64>) -> Self {
        Self {
            format: MANIFEST_FORMAT.into(),
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.to_vec(),
            timestamp: timestamp(),
            seeds,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.inputs.push(digest(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.outputs.push(digest(path)?);
        Ok(self)
    }

    /// Writes the manifest for artifact `out` and returns where it went.
    pub fn write(&self, out: &Path) -> Result<PathBuf, CliError> {
        let path = manifest_path(out);
        let text = toml::to_string(self).map_err(|e| CliError::Failed(e.to_string()))?;
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
    }

    /// Files whose current digest no longer matches the recorded one.
    pub fn stale(&self) -> Vec<String> {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .filter(|d| sha256_file(Path::new(&d.path)).ok().as_deref() != Some(d.sha256.as_str()))
            .map(|d| d.path.clone())
            .collect()
    }
}
