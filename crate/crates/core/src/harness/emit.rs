//! CSV traces and JSON run summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{HarnessError, RunConfig, RunOutput, TraceMeta};
use crate::harness::RegretTrace;

pub const CSV_HEADER: &str = "t,y,true_loss,per_round_min,cum_regret_dyn,cum_regret_comp";

/// Header plus one row per round; floats use the shortest exact form.
pub fn csv_string(trace: &RegretTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trace.rows {
        writeln!(out, "{},{},{},{},{},{}", r.t, r.y, r.true_loss, r.per_round_min, r.cum_regret_dyn, r.cum_regret_comp)
            .expect("writing to a String cannot fail");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_csv(trace: &RegretTrace, path: &Path) -> Result<(), HarnessError> {
    write_text(path, &csv_string(trace))
}

/// SHA-256 of the compact JSON form of the configuration.
pub fn config_hash(config: &RunConfig) -> String {
    let json = serde_json::to_string(config).expect("configurations always serialize");
    Sha256::digest(json.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub config_hash: String,
    pub final_regret_dyn: f64,
    pub final_regret_comp: f64,
    pub wall_time_secs: f64,
    pub meta: TraceMeta,
}

impl RunSummary {
    pub fn new(out: &RunOutput) -> Self {
        RunSummary {
            config_hash: config_hash(&out.config),
            config: out.config.clone(),
            final_regret_dyn: out.trace.final_regret_dyn(),
            final_regret_comp: out.trace.final_regret_comp(),
            wall_time_secs: out.wall_time_secs,
            meta: out.trace.meta.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Io { path: "<summary>".into(), message: e.to_string() })
    }
}

pub fn write_summary(out: &RunOutput, path: &Path) -> Result<(), HarnessError> {
    write_text(path, &(RunSummary::new(out).to_json() + "\n"))
}
