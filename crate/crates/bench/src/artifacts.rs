//! `trace.csv` and `summary.json`.
//!
//! trace.csv columns, in order: iter, n_exact_cum, L_star, U_star, L_lbo,
//! U_ubo, gamma, target, wall_time_s, level_value, ratio, step_norm,
//! solver_time_s. `gamma`, `target`, `level_value` and `ratio` are empty for
//! unstabilised runs.

use std::path::{Path, PathBuf};

use benders_core::level_set::StabilisationConfig;
use benders_core::{IterationRecord, RunResult, RunStatus};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::experiment::RunSpec;

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub instance: String,
    pub engine: String,
    pub eps: f64,
    pub stabilisation: Option<StabilisationConfig>,
    pub threads: usize,
    pub status: RunStatus,
    pub iterations: usize,
    pub exact_evaluations: usize,
    pub wall_time_s: f64,
    pub solver_time_s: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `(U - L) / max(|U|, 1)`.
    pub gap: f64,
    pub path_length: f64,
    pub incumbent: Vec<f64>,
}

impl RunSummary {
    pub fn new(instance: &str, spec: &RunSpec, run: &RunResult) -> Self {
        Self {
            instance: instance.to_string(),
            engine: spec.engine.to_string(),
            eps: spec.eps,
            stabilisation: spec.stabilisation_config(),
            threads: spec.threads,
            status: run.status,
            iterations: run.iterations,
            exact_evaluations: run.exact_evaluations,
            wall_time_s: run.wall_time_s,
            solver_time_s: run.solver_time_s,
            lower_bound: run.lower_bound,
            upper_bound: run.upper_bound,
            gap: run.gap(),
            path_length: run.path_length(),
            incumbent: run.incumbent.clone(),
        }
    }
}

/// Zeroes every wall-clock field so repeated runs give identical files.
pub fn strip_timing(summary: &mut RunSummary, records: &mut [IterationRecord]) {
    summary.wall_time_s = 0.0;
    summary.solver_time_s = 0.0;
    for r in records {
        r.wall_time_s = 0.0;
        r.solver_time_s = 0.0;
    }
}

fn tmp_name(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(format!(".{}", name.to_string_lossy()))
}

fn trace_bytes(records: &[IterationRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(TRACE_COLUMNS).map_err(|e| BenchError::artifact(Path::new(TRACE_FILE), e))?;
    }
    for r in records {
        w.serialize(r).map_err(|e| BenchError::artifact(Path::new(TRACE_FILE), e))?;
    }
    w.into_inner().map_err(|e| BenchError::artifact(Path::new(TRACE_FILE), e.error()))
}

pub const TRACE_COLUMNS: [&str; 13] = [
    "iter",
    "n_exact_cum",
    "L_star",
    "U_star",
    "L_lbo",
    "U_ubo",
    "gamma",
    "target",
    "wall_time_s",
    "level_value",
    "ratio",
    "step_norm",
    "solver_time_s",
];

/// Writes `trace.csv` and `summary.json` into `dir`. Both files are written
/// under temporary names first and only renamed once both are complete.
pub fn write_run(dir: &Path, summary: &RunSummary, records: &[IterationRecord]) -> Result<()> {
    let trace = trace_bytes(records)?;
    let json = serde_json::to_vec_pretty(summary).map_err(|e| BenchError::artifact(&dir.join(SUMMARY_FILE), e))?;
    std::fs::create_dir_all(dir).map_err(BenchError::io(dir))?;
    let files = [(dir.join(TRACE_FILE), trace), (dir.join(SUMMARY_FILE), json)];
    for (path, bytes) in &files {
        let tmp = tmp_name(path);
        std::fs::write(&tmp, bytes).map_err(BenchError::io(&tmp))?;
    }
    for (path, _) in &files {
        let tmp = tmp_name(path);
        std::fs::rename(&tmp, path).map_err(BenchError::io(path))?;
    }
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<IterationRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| BenchError::artifact(path, e))?;
    let headers = reader.headers().map_err(|e| BenchError::artifact(path, e))?;
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(BenchError::artifact(path, format!("unexpected columns {headers:?}")));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(k, row)| row.map_err(|e| BenchError::artifact(path, format!("row {}: {e}", k + 2))))
        .collect()
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::artifact(path, e))?;
    serde_json::from_str(&text).map_err(|e| BenchError::artifact(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(iter: usize, gamma: Option<f64>) -> IterationRecord {
        IterationRecord {
            iter,
            n_exact_cum: 3 * iter,
            l_star: 1.0 + iter as f64 / 3.0,
            u_star: f64::INFINITY,
            l_lbo: 0.1,
            u_ubo: 2.0e9,
            gamma,
            target: gamma.map(|g| g * 10.0),
            wall_time_s: 0.25,
            level_value: None,
            ratio: None,
            step_norm: 0.0,
            solver_time_s: 0.125,
        }
    }

    #[test]
    fn trace_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(TRACE_FILE);
        let records = vec![record(1, None), record(2, Some(0.2))];
        std::fs::write(&path, trace_bytes(&records).unwrap()).unwrap();
        assert_eq!(read_trace(&path).unwrap(), records);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_COLUMNS.join(","));
    }

    #[test]
    fn empty_trace_keeps_its_header() {
        let text = String::from_utf8(trace_bytes(&[]).unwrap()).unwrap();
        assert_eq!(text.trim_end(), TRACE_COLUMNS.join(","));
    }
}
