//! Run manifests and their verification.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub experiment: String,
    pub code_version: String,
    /// Resolved configuration, including `seed` and `threads`.
    pub config: serde_json::Value,
    pub derived_seeds: BTreeMap<String, u64>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputEntry>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn digest_file(path: &Path) -> std::io::Result<(String, u64)> {
    let bytes = fs::read(path)?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

pub fn entries(dir: &Path, files: &[String]) -> CliResult<Vec<OutputEntry>> {
    files
        .iter()
        .map(|f| {
            let (sha256, bytes) = digest_file(&dir.join(f))?;
            Ok(OutputEntry { file: f.clone(), sha256, bytes })
        })
        .collect()
}

pub fn read(path: &Path) -> CliResult<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Verify(format!("cannot read manifest {}: {e}", path.display())))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::Verify(format!("malformed manifest {}: {e}", path.display())))?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(CliError::Verify(format!("manifest schema {} is not {SCHEMA_VERSION}", m.schema_version)));
    }
    Ok(m)
}

/// Directory holding the manifest's outputs.
pub fn run_dir(manifest_path: &Path) -> PathBuf {
    manifest_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}

/// Recomputes every output digest; the first missing or altered file is an error.
pub fn check_digests(manifest_path: &Path) -> CliResult<RunManifest> {
    let m = read(manifest_path)?;
    let dir = run_dir(manifest_path);
    for e in &m.outputs {
        let p = dir.join(&e.file);
        let (sha, _) = digest_file(&p).map_err(|_| CliError::Verify(format!("missing output file {}", e.file)))?;
        if sha != e.sha256 {
            return Err(CliError::Verify(format!("digest mismatch for {}", e.file)));
        }
    }
    Ok(m)
}
