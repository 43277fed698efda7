use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use crate::error::Result;

pub const CODE_VERSION: &str = concat!("rectfrac ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
}

/// Per-trial records plus summary statistics of one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub id: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: BTreeMap<String, Value>,
    /// Failed checks; a run with violations is a failed verification.
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl ExperimentResult {
    pub fn new(experiment: &str, config: &ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            id: config.id.clone(),
            experiment: experiment.to_string(),
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            violations: Vec::new(),
            warnings: Vec::new(),
            provenance: Provenance { config_hash: config.hash(), code_version: CODE_VERSION.to_string() },
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("summary value serializes"));
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn summary_json(&self) -> Value {
        json!({
            "id": self.id,
            "experiment": self.experiment,
            "columns": self.columns,
            "trials_rows": self.rows.len(),
            "summary": self.summary,
            "violations": self.violations,
            "warnings": self.warnings,
            "provenance": self.provenance,
        })
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Writes `<id>/config.json`, `<id>/summary.json` and, when there are rows,
/// `<id>/trials.csv` under `out_dir`.
pub fn emit_report(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let dir = out_dir.join(&result.id);
    fs::create_dir_all(&dir)?;
    let mut paths = Vec::new();
    let config = dir.join("config.json");
    write_file(&config, &(result.config.to_pretty_json() + "\n"))?;
    paths.push(config);
    if !result.rows.is_empty() {
        let trials = dir.join("trials.csv");
        write_file(&trials, &result.csv())?;
        paths.push(trials);
    }
    let summary = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&result.summary_json())?;
    write_file(&summary, &(text + "\n"))?;
    paths.push(summary);
    Ok(paths)
}
