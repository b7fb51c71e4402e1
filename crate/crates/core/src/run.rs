use serde::{Deserialize, Serialize};

use crate::sparse::distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    IterationLimit,
    SolverFailure,
}

/// One row of `trace.csv`.
///
/// The first nine fields are the fixed trace schema; `level_value`, `ratio`,
/// `step_norm` and `solver_time_s` follow them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub n_exact_cum: usize,
    #[serde(rename = "L_star")]
    pub l_star: f64,
    #[serde(rename = "U_star")]
    pub u_star: f64,
    #[serde(rename = "L_lbo")]
    pub l_lbo: f64,
    #[serde(rename = "U_ubo")]
    pub u_ubo: f64,
    pub gamma: Option<f64>,
    pub target: Option<f64>,
    pub wall_time_s: f64,
    /// `f(x) + sum pi beta` at the accepted stabilisation solution.
    pub level_value: Option<f64>,
    pub ratio: Option<f64>,
    /// Distance from the previous query point over master variables.
    pub step_norm: f64,
    pub solver_time_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub engine: String,
    pub status: RunStatus,
    pub iterations: usize,
    pub exact_evaluations: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub incumbent: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub wall_time_s: f64,
    pub solver_time_s: f64,
    /// Query points in visiting order (RMP or LMP solutions).
    #[serde(skip)]
    pub trajectory: Vec<Vec<f64>>,
}

impl RunResult {
    pub fn gap(&self) -> f64 {
        relative_gap(self.lower_bound, self.upper_bound)
    }

    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    /// `sum_j |x_j - x_{j-1}|` over the query trajectory.
    pub fn path_length(&self) -> f64 {
        self.trajectory
            .windows(2)
            .map(|w| distance(&w[0], &w[1]))
            .sum()
    }
}

/// `(U - L) / max(|U|, 1)`.
pub fn relative_gap(lower: f64, upper: f64) -> f64 {
    if !upper.is_finite() || !lower.is_finite() {
        return f64::INFINITY;
    }
    (upper - lower) / upper.abs().max(1.0)
}

/// Convergence test with `eps` in percent.
pub fn within_tolerance(lower: f64, upper: f64, eps_percent: f64) -> bool {
    relative_gap(lower, upper) <= eps_percent / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_uses_unit_floor() {
        assert_eq!(relative_gap(0.0, 0.5), 0.5);
        assert_eq!(relative_gap(90.0, 100.0), 0.1);
        assert!(within_tolerance(99.9, 100.0, 0.1));
        assert!(!within_tolerance(99.8, 100.0, 0.1));
        assert_eq!(relative_gap(0.0, f64::INFINITY), f64::INFINITY);
    }
}
