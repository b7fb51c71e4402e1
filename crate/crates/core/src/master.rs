//! Relaxed master problem built from the cut pools.

use crate::cuts::CutPool;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, RowSense, SolverOptions};
use crate::problem::StructuredProblem;

/// Master columns followed by one epigraph column per node.
#[derive(Debug, Clone)]
pub(crate) struct CutModel {
    pub lp: LinearProgram,
    pub x_dim: usize,
}

impl CutModel {
    pub fn build(problem: &StructuredProblem, pools: &CutPool) -> Self {
        Self::build_selected(problem, pools, None)
    }

    /// Keeps only the listed cuts of each node when `selected` is given.
    pub fn build_selected(problem: &StructuredProblem, pools: &CutPool, selected: Option<&[Vec<usize>]>) -> Self {
        let mut lp = LinearProgram::new();
        let first = problem.master.append_to(&mut lp);
        debug_assert_eq!(first, 0);
        let x_dim = problem.master.x_dim();
        for node in &problem.nodes {
            lp.add_col(node.pi, pools.floor(), f64::INFINITY);
        }
        let (lower, upper) = (&problem.master.x_lower, &problem.master.x_upper);
        for i in 0..problem.node_count() {
            let beta = x_dim + i;
            let rows = pools.master_rows(i);
            let picked: Vec<usize> = match selected {
                Some(sel) => sel[i].clone(),
                None => (0..rows.len()).collect(),
            };
            for row in picked.into_iter().map(|k| &rows[k]) {
                let (coeffs, constant) = condition_row(&row.coeffs, row.constant, lower, upper);
                let entries = std::iter::once((beta, 1.0)).chain(coeffs.into_iter().map(|(c, v)| (c, -v)));
                lp.add_row(entries, RowSense::Ge, constant);
            }
        }
        Self { lp, x_dim }
    }

    pub fn split<'a>(&self, primal: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        primal.split_at(self.x_dim)
    }
}

#[derive(Debug, Clone)]
pub struct RmpSolution {
    pub x: Vec<f64>,
    pub beta: Vec<f64>,
    /// `f(x) + sum_i pi_i beta_i`.
    pub lower_bound: f64,
    pub solve_time_s: f64,
}

pub fn solve_rmp(
    problem: &StructuredProblem,
    pools: &CutPool,
    backend: &dyn LpBackend,
    opts: &SolverOptions,
) -> Result<RmpSolution> {
    let model = CutModel::build(problem, pools);
    let out = backend.solve(&model.lp, opts)?;
    if !out.is_optimal() {
        return Err(Error::solve("relaxed master problem", out.status));
    }
    let (x, beta) = model.split(&out.primal);
    let x = clamp_to_box(x, &problem.master.x_lower, &problem.master.x_upper);
    Ok(RmpSolution {
        lower_bound: out.objective,
        x,
        beta: beta.to_vec(),
        solve_time_s: out.solve_time_s,
    })
}

/// Rewrites `beta >= constant + sum v x` for the solver. Fixed columns move
/// into the constant, and terms too small to matter are replaced by their
/// least value over the box, which keeps the row a valid lower bound.
fn condition_row(coeffs: &[(usize, f64)], constant: f64, lower: &[f64], upper: &[f64]) -> (Vec<(usize, f64)>, f64) {
    const NEGLIGIBLE: f64 = 1e-11;
    let reach = |c: usize, v: f64| {
        let m = lower[c].abs().max(upper[c].abs());
        if m.is_finite() { v.abs() * m.max(1.0) } else { f64::INFINITY }
    };
    let mut constant = constant;
    let mut scale = 0.0f64;
    for &(c, v) in coeffs {
        if lower[c] == upper[c] {
            constant += v * lower[c];
        } else {
            scale = scale.max(reach(c, v));
        }
    }
    let scale = scale.max(constant.abs());
    let mut kept = Vec::with_capacity(coeffs.len());
    for &(c, v) in coeffs {
        if lower[c] == upper[c] || v == 0.0 {
            continue;
        }
        if reach(c, v) <= NEGLIGIBLE * scale {
            constant += (v * lower[c]).min(v * upper[c]);
        } else {
            kept.push((c, v));
        }
    }
    (kept, constant)
}

pub(crate) fn clamp_to_box(x: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (lo, up))| v.clamp(*lo, *up))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::HighsBackend;
    use crate::problem::tests::toy;

    #[test]
    fn floor_only_master_minimises_f() {
        let p = toy(2);
        let pools = CutPool::new(2, 0.0);
        let sol = solve_rmp(&p, &pools, &HighsBackend, &SolverOptions::default()).unwrap();
        // f >= 0 with capacity at its lower bound 0, the fixed demand columns cost nothing
        assert!(sol.lower_bound.abs() < 1e-12);
        assert_eq!(sol.beta, vec![0.0, 0.0]);
    }
}
