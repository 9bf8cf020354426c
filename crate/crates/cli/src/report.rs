use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use precond_core::{Error, Result, SparseSymMatrix};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct MatrixInfo {
    pub n: usize,
    pub nnz: usize,
    pub source: String,
}

impl MatrixInfo {
    pub fn new(m: &SparseSymMatrix, source: &Path) -> Self {
        Self {
            n: m.n(),
            nnz: m.nnz(),
            source: source.display().to_string(),
        }
    }
}

/// JSON document written by every command.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub method: String,
    pub matrix: Option<MatrixInfo>,
    pub kappa_bound: Option<f64>,
    pub certified: Option<bool>,
    pub tau: Option<f64>,
    pub status: String,
    pub wall_time_s: f64,
    pub matvecs: BTreeMap<String, usize>,
    /// Paths of traces and other files written alongside.
    pub files: BTreeMap<String, String>,
    /// Command-specific results.
    pub details: serde_json::Value,
    pub config: RunConfig,
    pub args: Vec<String>,
    pub version: &'static str,
}

impl Report {
    pub fn new(command: &'static str, method: impl Into<String>, config: &RunConfig) -> Self {
        Self {
            command,
            method: method.into(),
            matrix: None,
            kappa_bound: None,
            certified: None,
            tau: None,
            status: "ok".into(),
            wall_time_s: 0.0,
            matvecs: BTreeMap::new(),
            files: BTreeMap::new(),
            details: serde_json::Value::Null,
            config: config.clone(),
            args: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn file(&mut self, key: &str, path: &Path) {
        self.files.insert(key.into(), path.display().to_string());
    }

    /// Writes `report.json` into `dir` and prints it.
    pub fn emit(&self, dir: &Path) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let path = dir.join(format!("{}_report.json", self.command.replace('-', "_")));
        write_file(&path, text.as_bytes())?;
        println!("{text}");
        Ok(path)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Mmio(precond_core::MmioError::Io(e)))
}
