use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Policy, ResultRow};
use crate::error::{Error, Result};

pub const DETAIL_HEADER: [&str; 7] = [
    "sweep_value",
    "policy",
    "trial",
    "total_energy_j",
    "total_saving_j",
    "offload_count",
    "wall_time_s",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "sweep_value",
    "policy",
    "trials",
    "mean_total_energy_j",
    "se_total_energy_j",
    "mean_total_saving_j",
    "se_total_saving_j",
    "mean_offload_count",
    "se_offload_count",
];

/// Per-(sweep value, policy) means and standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub policy: Policy,
    pub trials: usize,
    pub mean_total_energy_j: f64,
    pub se_total_energy_j: f64,
    pub mean_total_saving_j: f64,
    pub se_total_saving_j: f64,
    pub mean_offload_count: f64,
    pub se_offload_count: f64,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups rows by (sweep value, policy), keeping first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(f64, Policy)> = Vec::new();
    for row in rows {
        let key = (row.sweep_value, row.policy);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(sweep_value, policy)| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.sweep_value == sweep_value && r.policy == policy)
                .collect();
            let column = |f: fn(&ResultRow) -> f64| mean_se(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (mean_total_energy_j, se_total_energy_j) = column(|r| r.total_energy_j);
            let (mean_total_saving_j, se_total_saving_j) = column(|r| r.total_saving_j);
            let (mean_offload_count, se_offload_count) = column(|r| r.offload_count as f64);
            SummaryRow {
                sweep_value,
                policy,
                trials: group.len(),
                mean_total_energy_j,
                se_total_energy_j,
                mean_total_saving_j,
                se_total_saving_j,
                mean_offload_count,
                se_offload_count,
            }
        })
        .collect()
}

pub fn write_detail<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DETAIL_HEADER)?;
    for r in rows {
        w.write_record([
            r.sweep_value.to_string(),
            r.policy.to_string(),
            r.trial_index.to_string(),
            r.total_energy_j.to_string(),
            r.total_saving_j.to_string(),
            r.offload_count.to_string(),
            r.wall_time_s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.sweep_value.to_string(),
            r.policy.to_string(),
            r.trials.to_string(),
            r.mean_total_energy_j.to_string(),
            r.se_total_energy_j.to_string(),
            r.mean_total_saving_j.to_string(),
            r.se_total_saving_j.to_string(),
            r.mean_offload_count.to_string(),
            r.se_offload_count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Writes the per-trial rows to `path` and the summary next to it as
/// `<stem>_summary.csv`. Returns the summary path.
pub fn emit_results(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(Error::Refused("no result rows to write".into()));
    }
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::config(format!("bad output path {}", path.display())))?;
    let summary_path = path.with_file_name(format!("{stem}_summary.csv"));

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_detail(rows, file)?;
    let file = File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    write_summary(&summarize(rows), file)?;
    Ok(summary_path)
}
