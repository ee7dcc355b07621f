//! Raw field dumps: little-endian `f64` values, row-major, plus a JSON sidecar.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use crate::grid::GridSpec;
use crate::sampler::{FieldKind, FieldSample};
use crate::{FieldError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub grid: GridSpec,
    pub nx: usize,
    pub ny: usize,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub kind: FieldKind,
    pub seed: u64,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes `path` (binary) and `path.json` (header). Returns both paths.
pub fn write_field(field: &FieldSample, path: &Path) -> Result<(PathBuf, PathBuf)> {
    let mut bytes = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let header = DumpHeader {
        grid: field.grid,
        nx: field.nx(),
        ny: field.ny(),
        scale_lo: field.scale_lo,
        scale_hi: field.scale_hi,
        kind: field.kind,
        seed: field.seed,
    };
    let side = sidecar(path);
    let json = serde_json::to_string_pretty(&header).map_err(|e| FieldError::Io(e.to_string()))?;
    fs::write(&side, json)?;
    Ok((path.to_path_buf(), side))
}

pub fn read_field(path: &Path) -> Result<FieldSample> {
    let header: DumpHeader = serde_json::from_str(&fs::read_to_string(sidecar(path))?)
        .map_err(|e| FieldError::Io(format!("bad sidecar: {e}")))?;
    let bytes = fs::read(path)?;
    if bytes.len() != header.nx * header.ny * 8 || header.grid.nx() != header.nx || header.grid.ny() != header.ny {
        return Err(FieldError::Io(format!("{} does not match its sidecar", path.display())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    FieldSample::new(header.grid, values, header.scale_lo, header.scale_hi, header.kind, header.seed)
}
