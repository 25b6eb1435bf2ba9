//! CSV rows and the JSON metadata sidecar.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Derived, ExperimentConfig};
use super::experiment::ResultTable;
use crate::error::{io_err, Error, Result};

/// Decimal with 9 significant digits; `NaN`, `inf` and `-inf` for non-finite values.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        return format!("{v:.8e}");
    }
    let s = format!("{v:.*}", (8 - exp).max(0) as usize);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn header(table: &ResultTable) -> Vec<String> {
    let mut h = vec![format!("sweep_{}", table.sweep_variable.name())];
    h.extend(table.columns.iter().cloned());
    h.extend(["feasible", "drops", "retries", "seed", "trials"].map(String::from));
    h
}

pub fn write_csv(table: &ResultTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::Config("no rows to write".into()));
    }
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header(table))?;
    for r in &table.rows {
        let mut rec = vec![format_value(r.sweep_value)];
        rec.extend(r.values.iter().map(|&v| format_value(v)));
        rec.extend([
            u8::from(r.feasible).to_string(),
            r.drops.to_string(),
            r.retries.to_string(),
            table.seed.to_string(),
            table.trials.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub experiment: String,
    pub version: String,
    /// SHA-256 of the resolved configuration as TOML.
    pub config_sha256: String,
    pub seed: u64,
    pub trials: usize,
    pub drops: usize,
    pub pinned_drops: bool,
    pub workers: usize,
    pub rows: usize,
    pub infeasible_rows: usize,
    pub retries: usize,
    pub runtime_s: f64,
    pub derived: Derived,
    pub config: ExperimentConfig,
}

impl RunMetadata {
    pub fn new(cfg: &ExperimentConfig, table: &ResultTable, runtime_s: f64) -> Self {
        RunMetadata {
            experiment: cfg.experiment.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config_hash(cfg),
            seed: cfg.mc.seed,
            trials: cfg.mc.trials,
            drops: cfg.mc.drops,
            pinned_drops: cfg.mc.pin_drops,
            workers: cfg.mc.workers,
            rows: table.rows.len(),
            infeasible_rows: table.rows.iter().filter(|r| !r.feasible).count(),
            retries: table.retries(),
            runtime_s,
            derived: cfg.derived(),
            config: cfg.clone(),
        }
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(cfg.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// `out.csv` → `out.csv.meta.json`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_metadata(meta: &RunMetadata, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    std::fs::write(path, text + "\n").map_err(io_err(path))
}
