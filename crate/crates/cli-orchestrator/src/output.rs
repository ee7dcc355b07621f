//! Output directory writer: RFC-4180 CSV and sorted-key JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> CliResult<Output> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Output files in the order they were written.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Records a file written by other code into the directory.
    pub fn adopt(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(self.path(name)).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
        self.adopt(name);
        Ok(())
    }

    /// Pretty JSON with object keys sorted, newline-terminated.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        fs::write(self.path(name), to_sorted_json(value)?)?;
        self.adopt(name);
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub fn to_sorted_json<T: Serialize>(value: &T) -> CliResult<String> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Runtime(format!("json: {e}")))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Runtime(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Shortest round-trip decimal form of a float.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
