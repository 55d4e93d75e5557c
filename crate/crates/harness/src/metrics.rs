//! Per-episode metrics rows and their CSV form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const HEADER: &str = "run_id,strategy,beta,seed,episode,total_reward,mean_reward_100,wall_steps";

/// One CSV row. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub run_id: String,
    pub strategy: String,
    pub beta: f64,
    pub seed: u64,
    pub episode: usize,
    pub total_reward: f64,
    pub mean_reward_100: f64,
    /// Environment steps taken since the start of the run.
    pub wall_steps: u64,
}

pub fn write_rows(path: &Path, rows: &[MetricRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != HEADER {
        return Err(HarnessError::Config(format!(
            "{} does not have the metrics header `{HEADER}`",
            path.display()
        )));
    }
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}
