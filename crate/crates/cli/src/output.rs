//! CSV tables, the run manifest and writing them to disk.

use std::fs;
use std::path::Path;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// A named output file held in memory until the whole run has succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self::with_header(header.iter().map(|h| h.to_string()).collect())
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width for {:?}", self.header);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_artifact(self, name: &str) -> Artifact {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        Artifact {
            name: name.to_string(),
            bytes: w.into_inner().expect("in-memory flush"),
        }
    }
}

/// Shortest decimal that reads back as the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `manifest.json`: tool version, experiment, seed, the hash of the
/// resolved settings and a hash of every other artifact.
pub fn manifest(config: &ExperimentConfig, artifacts: &[Artifact]) -> Artifact {
    let files: Vec<_> = artifacts
        .iter()
        .map(|a| json!({ "file": a.name, "bytes": a.bytes.len(), "sha256": sha256_hex(&a.bytes) }))
        .collect();
    let value = json!({
        "tool": "smcrep",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": config.experiment.name(),
        "seed": config.seed().ok(),
        "config_sha256": sha256_hex(config.canonical_text().as_bytes()),
        "settings": config.settings,
        "artifacts": files,
    });
    let mut bytes = serde_json::to_vec_pretty(&value).expect("json of plain values");
    bytes.push(b'\n');
    Artifact {
        name: "manifest.json".to_string(),
        bytes,
    }
}

/// Writes every artifact into `dir`, creating it if needed. Each file goes
/// to a temporary name first and is renamed into place.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        let tmp = dir.join(format!(".{}.tmp", a.name));
        fs::write(&tmp, &a.bytes).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
