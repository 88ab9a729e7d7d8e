//! CSV tables with a fixed float format and their JSON manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::CliError;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| num(*v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `run.csv` -> `run.json`
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub struct Manifest {
    pub quantity: String,
    pub command: String,
    pub config: Value,
    pub diagnostics: Value,
}

impl Manifest {
    pub fn write(&self, csv: &Path, table: &Table) -> Result<PathBuf, CliError> {
        let file = csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let doc = json!({
            "quantity": self.quantity,
            "command": self.command,
            "data_file": file,
            "columns": table.header,
            "rows": table.rows.len(),
            "versions": {
                "ptmetric-cli": env!("CARGO_PKG_VERSION"),
                "ptmetric-core": ptmetric_core::VERSION,
            },
            "config": self.config,
            "diagnostics": self.diagnostics,
        });
        let path = manifest_path(csv);
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

/// Writes the table and its manifest; returns the manifest path.
pub fn emit(table: &Table, manifest: &Manifest, csv: &Path) -> Result<PathBuf, CliError> {
    table.write(csv)?;
    manifest.write(csv, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn manifest_sits_next_to_the_data() {
        assert_eq!(manifest_path(Path::new("out/meff.csv")), PathBuf::from("out/meff.json"));
    }
}
