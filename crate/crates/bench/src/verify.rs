//! Audits emitted traces: monotone bounds, level feasibility of stabilised
//! iterations, and agreement between a summary and its trace.

use std::path::{Path, PathBuf};

use benders_core::run::relative_gap;
use benders_core::IterationRecord;

use crate::artifacts::{read_summary, read_trace, RunSummary, SUMMARY_FILE, TRACE_FILE};
use crate::error::{BenchError, Result};

/// Level feasibility allows `1e-6 max(1, |T|)` above the target.
pub const LEVEL_TOL: f64 = 1e-6;
pub const GAP_TOL: f64 = 1e-12;

pub fn check_records(records: &[IterationRecord]) -> Vec<String> {
    let mut out = Vec::new();
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.l_star < a.l_star {
            out.push(format!("iteration {}: L_star fell from {} to {}", b.iter, a.l_star, b.l_star));
        }
        if b.u_star > a.u_star {
            out.push(format!("iteration {}: U_star rose from {} to {}", b.iter, a.u_star, b.u_star));
        }
    }
    for r in records {
        if r.l_star > r.u_star {
            out.push(format!("iteration {}: L_star {} above U_star {}", r.iter, r.l_star, r.u_star));
        }
        if let (Some(level), Some(target)) = (r.level_value, r.target) {
            if target.is_finite() && level > target + LEVEL_TOL * target.abs().max(1.0) {
                out.push(format!("iteration {}: level {level} above target {target}", r.iter));
            }
        }
    }
    out
}

pub fn check_summary(summary: &RunSummary, records: &[IterationRecord]) -> Vec<String> {
    let mut out = Vec::new();
    if summary.iterations != records.len() {
        out.push(format!("summary reports {} iterations, trace has {}", summary.iterations, records.len()));
    }
    if let Some(last) = records.last() {
        let gap = relative_gap(last.l_star, last.u_star);
        if !(gap == summary.gap || (gap - summary.gap).abs() <= GAP_TOL) {
            out.push(format!("summary gap {} differs from trace gap {gap}", summary.gap));
        }
        if last.n_exact_cum != summary.exact_evaluations {
            out.push(format!(
                "summary reports {} exact solves, trace ends at {}",
                summary.exact_evaluations, last.n_exact_cum
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub traces: usize,
    pub rows: usize,
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.ok() {
            Ok(self)
        } else {
            Err(BenchError::Verify(self.violations))
        }
    }
}

fn find_traces(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let unreadable = |e: std::io::Error| BenchError::artifact(path, e);
    let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(unreadable)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .map_err(unreadable)?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_traces(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == TRACE_FILE) {
            out.push(p);
        }
    }
    Ok(())
}

/// Checks a trace file, or every `trace.csv` below a directory. A
/// `summary.json` beside a trace is checked against it.
pub fn verify_path(path: &Path) -> Result<VerifyReport> {
    let mut traces = Vec::new();
    find_traces(path, &mut traces)?;
    if traces.is_empty() {
        return Err(BenchError::Usage(format!("no {TRACE_FILE} under {}", path.display())));
    }
    let mut report = VerifyReport::default();
    for trace in &traces {
        let records = read_trace(trace)?;
        let name = trace.display();
        let mut found = check_records(&records);
        let summary = trace.with_file_name(SUMMARY_FILE);
        if summary.is_file() {
            found.extend(check_summary(&read_summary(&summary)?, &records));
        }
        report.violations.extend(found.into_iter().map(|v| format!("{name}: {v}")));
        report.traces += 1;
        report.rows += records.len();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iter: usize, l: f64, u: f64) -> IterationRecord {
        IterationRecord {
            iter,
            n_exact_cum: iter,
            l_star: l,
            u_star: u,
            l_lbo: l,
            u_ubo: u,
            gamma: None,
            target: None,
            wall_time_s: 0.0,
            level_value: None,
            ratio: None,
            step_norm: 0.0,
            solver_time_s: 0.0,
        }
    }

    #[test]
    fn monotone_trace_passes() {
        let t = vec![rec(1, 1.0, f64::INFINITY), rec(2, 2.0, 9.0), rec(3, 2.0, 3.0)];
        assert!(check_records(&t).is_empty());
    }

    #[test]
    fn falling_lower_bound_is_reported() {
        let t = vec![rec(1, 2.0, 9.0), rec(2, 1.0, 9.0)];
        assert_eq!(check_records(&t).len(), 1);
        let t = vec![rec(1, 2.0, 9.0), rec(2, 2.0, 9.5)];
        assert_eq!(check_records(&t).len(), 1);
    }

    #[test]
    fn level_above_target_is_reported() {
        let mut r = rec(1, 0.0, 10.0);
        r.target = Some(1.0e8);
        r.level_value = Some(1.0e8 + 50.0);
        assert!(check_records(&[r.clone()]).is_empty());
        r.level_value = Some(1.0e8 + 500.0);
        assert_eq!(check_records(&[r]).len(), 1);
    }
}
