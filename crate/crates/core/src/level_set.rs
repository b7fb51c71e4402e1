//! Level-set stabilisation: target level, projection onto the level set of
//! the cutting-plane model, and the dynamic stabilisation-factor controller.

use serde::{Deserialize, Serialize};

use crate::cuts::CutPool;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, RowSense, SolveStatus, SolverOptions};
use crate::master::{clamp_to_box, CutModel};
use crate::problem::{node_view, StructuredProblem};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilisationConfig {
    pub gamma0: f64,
    pub dynamic: bool,
    pub omega: f64,
    pub p_low: f64,
    pub p_high: f64,
    pub gamma_clamp: (f64, f64),
}

impl Default for StabilisationConfig {
    fn default() -> Self {
        Self {
            gamma0: 0.2,
            dynamic: false,
            omega: 0.5,
            p_low: 0.1,
            p_high: 0.9,
            gamma_clamp: (1e-4, 0.999),
        }
    }
}

impl StabilisationConfig {
    pub fn fixed(gamma: f64) -> Self {
        Self {
            gamma0: gamma,
            ..Self::default()
        }
    }

    pub fn dynamic(gamma0: f64) -> Self {
        Self {
            gamma0,
            dynamic: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.gamma_clamp;
        let problems = [
            (!(0.0 < lo && lo <= hi && hi < 1.0), "gamma clamp must satisfy 0 < min <= max < 1"),
            (!(lo <= self.gamma0 && self.gamma0 <= hi), "gamma0 must lie inside the clamp interval"),
            (!(0.0 < self.omega && self.omega < 1.0), "omega must lie in (0, 1)"),
            (
                !(0.0 < self.p_low && self.p_low < self.p_high && self.p_high < 1.0),
                "need 0 < p_low < p_high < 1",
            ),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::Config((*msg).into())),
            None => Ok(()),
        }
    }

    fn clamp(&self, gamma: f64) -> f64 {
        gamma.clamp(self.gamma_clamp.0, self.gamma_clamp.1)
    }
}

/// `L + gamma (U - L)`. Infinite when no upper bound is known yet.
pub fn compute_target(l_star: f64, u_star_prev: f64, gamma: f64) -> f64 {
    if !u_star_prev.is_finite() {
        return f64::INFINITY;
    }
    l_star + gamma * (u_star_prev - l_star)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub gamma: f64,
    pub l_lbo_prev: Option<f64>,
    pub target_prev: Option<f64>,
}

impl TargetState {
    pub fn new(cfg: &StabilisationConfig) -> Self {
        Self {
            gamma: cfg.clamp(cfg.gamma0),
            l_lbo_prev: None,
            target_prev: None,
        }
    }
}

/// Actual over predicted improvement, if both are positive.
pub fn improvement_ratio(l_lbo_prev: f64, target: f64, l_lbo_cur: f64) -> Option<f64> {
    let actual = l_lbo_prev - l_lbo_cur;
    let predicted = l_lbo_prev - target;
    (actual > 0.0 && predicted > 0.0 && predicted.is_finite()).then(|| actual / predicted)
}

/// New stabilisation factor from the ratio of actual to predicted improvement.
/// With inexact information (no ratio) the factor is kept.
pub fn update_gamma(state: &TargetState, l_lbo_cur: f64, cfg: &StabilisationConfig) -> f64 {
    let ratio = match (state.l_lbo_prev, state.target_prev) {
        (Some(prev), Some(t)) => improvement_ratio(prev, t, l_lbo_cur),
        _ => None,
    };
    let gamma = match ratio {
        Some(r) if r <= cfg.p_low => 1.0 - cfg.omega * (1.0 - state.gamma),
        Some(r) if r >= cfg.p_high => cfg.omega * state.gamma,
        _ => state.gamma,
    };
    cfg.clamp(gamma)
}

#[derive(Debug, Clone)]
pub struct LmpSolution {
    pub x: Vec<f64>,
    pub beta: Vec<f64>,
    /// `f(x) + sum_i pi_i beta_i` at the solution.
    pub level_value: f64,
    pub solve_time_s: f64,
    /// Set when the solver failed and `fallback` was returned instead.
    pub fell_back: bool,
}

/// Projects `x_ref` onto `{x in X : model(x) <= target}`, where the model is
/// the cutting-plane approximation held in `pools`.
///
/// Only cuts that matter near the master optimiser enter the program at
/// first; violated ones are added until the solution satisfies every cut.
/// If solver tolerances leave the level slightly exceeded, the point is
/// pulled back towards `fallback` until the exact model meets the target.
///
/// `fallback` (normally the RMP optimiser, which is always feasible when
/// `target >= L*`) is returned if the solver cannot produce a solution.
pub fn solve_lmp(
    problem: &StructuredProblem,
    pools: &CutPool,
    x_ref: &[f64],
    target: f64,
    fallback: (&[f64], &[f64]),
    working: &mut WorkingSet,
    backend: &dyn LpBackend,
    opts: &SolverOptions,
) -> Result<LmpSolution> {
    let n = problem.master.x_dim();
    if x_ref.len() != n {
        return Err(Error::Dimension {
            what: "reference point",
            expected: n,
            found: x_ref.len(),
        });
    }
    let (x_rmp, beta_rmp) = fallback;
    let mut selected = working.start(problem, pools, x_rmp, beta_rmp, x_ref)?;
    let mut solve_time_s = 0.0;
    let mut x = None;
    for _ in 0..MAX_SEPARATION_ROUNDS {
        let model = CutModel::build_selected(problem, pools, Some(&selected));
        let lp = projection_program(problem, model.lp, x_ref, target);
        let out = backend.solve(&lp, opts)?;
        solve_time_s += out.solve_time_s;
        if out.status != SolveStatus::Optimal {
            log::warn!(
                "level projection returned {:?} at target {target}; using the master optimiser",
                out.status
            );
            return Ok(LmpSolution {
                level_value: model_level(problem, pools, x_rmp)?.0,
                x: x_rmp.to_vec(),
                beta: beta_rmp.to_vec(),
                solve_time_s,
                fell_back: true,
            });
        }
        let (xs, beta) = out.primal.split_at(n);
        let xs = clamp_to_box(xs, &problem.master.x_lower, &problem.master.x_upper);
        let added = add_violated(problem, pools, &xs, beta, &mut selected)?;
        x = Some(xs);
        if added == 0 {
            break;
        }
    }
    let mut x = x.expect("at least one separation round");
    working.finish(problem, pools, &x, selected)?;

    let (mut level_value, mut beta) = model_level(problem, pools, &x)?;
    if level_value > target {
        // the model is convex and meets the target at the master optimiser
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let t = 0.5 * (lo + hi);
            if model_level(problem, pools, &lerp(x_rmp, &x, t))?.0 <= target {
                lo = t;
            } else {
                hi = t;
            }
        }
        log::debug!("level exceeded by {:e}; step shortened to {lo}", level_value - target);
        x = lerp(x_rmp, &x, lo);
        (level_value, beta) = model_level(problem, pools, &x)?;
    }
    Ok(LmpSolution {
        x,
        beta,
        level_value,
        solve_time_s,
        fell_back: false,
    })
}

const MAX_SEPARATION_ROUNDS: usize = 50;
const CUTS_PER_ROUND: usize = 10;

/// `f(x) + sum_i pi_i model_i(x)` with the per-node model values.
pub fn model_level(problem: &StructuredProblem, pools: &CutPool, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut level = problem.master.cost(x);
    let mut beta = Vec::with_capacity(problem.node_count());
    for (i, node) in problem.nodes.iter().enumerate() {
        let b = pools.model_value(i, &node_view(x, node)?);
        level += node.pi * b;
        beta.push(b);
    }
    Ok((level, beta))
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
}

fn slack_tol(value: f64) -> f64 {
    1e-9 * (1.0 + value.abs())
}

/// Cuts carried from one projection to the next. Starting from the cuts that
/// were nearly active last time, plus every cut added since, usually leaves
/// little to separate.
#[derive(Debug, Clone, Default)]
pub struct WorkingSet {
    selected: Vec<Vec<usize>>,
    seen: Vec<usize>,
}

impl WorkingSet {
    fn start(
        &self,
        problem: &StructuredProblem,
        pools: &CutPool,
        x_rmp: &[f64],
        beta_rmp: &[f64],
        x_ref: &[f64],
    ) -> Result<Vec<Vec<usize>>> {
        let mut selected = Vec::with_capacity(problem.node_count());
        for (i, node) in problem.nodes.iter().enumerate() {
            let cuts = pools.cuts(i);
            let seen = self.seen.get(i).copied().unwrap_or(0);
            let mut keep = vec![false; cuts.len()];
            for &k in self.selected.get(i).map(Vec::as_slice).unwrap_or(&[]) {
                keep[k] = true;
            }
            for flag in &mut keep[seen..] {
                *flag = true;
            }
            // the master optimiser must stay feasible, so its tight cuts go in
            let at_rmp = node_view(x_rmp, node)?;
            for (k, c) in cuts.iter().enumerate() {
                if c.value_at(&at_rmp) >= beta_rmp[i] - slack_tol(beta_rmp[i]) {
                    keep[k] = true;
                }
            }
            let at_ref = node_view(x_ref, node)?;
            let best = (0..cuts.len()).max_by(|&a, &b| cuts[a].value_at(&at_ref).total_cmp(&cuts[b].value_at(&at_ref)));
            if let Some(b) = best {
                keep[b] = true;
            }
            selected.push((0..cuts.len()).filter(|&k| keep[k]).collect());
        }
        Ok(selected)
    }

    fn finish(&mut self, problem: &StructuredProblem, pools: &CutPool, x: &[f64], selected: Vec<Vec<usize>>) -> Result<()> {
        self.seen = (0..problem.node_count()).map(|i| pools.cuts(i).len()).collect();
        self.selected = Vec::with_capacity(selected.len());
        for ((i, node), sel) in problem.nodes.iter().enumerate().zip(selected) {
            let view = node_view(x, node)?;
            let cuts = pools.cuts(i);
            let model = pools.model_value(i, &view);
            let near = 1e-4 * (1.0 + model.abs());
            self.selected.push(sel.into_iter().filter(|&k| cuts[k].value_at(&view) >= model - near).collect());
        }
        Ok(())
    }
}

/// Adds the most violated missing cuts of each node; returns how many.
fn add_violated(
    problem: &StructuredProblem,
    pools: &CutPool,
    x: &[f64],
    beta: &[f64],
    selected: &mut [Vec<usize>],
) -> Result<usize> {
    let mut added = 0;
    for (i, node) in problem.nodes.iter().enumerate() {
        let view = node_view(x, node)?;
        let cuts = pools.cuts(i);
        let mut violated: Vec<(f64, usize)> = (0..cuts.len())
            .map(|k| (cuts[k].value_at(&view) - beta[i], k))
            .filter(|&(v, k)| v > slack_tol(beta[i]) && !selected[i].contains(&k))
            .collect();
        violated.sort_by(|a, b| b.0.total_cmp(&a.0));
        for &(_, k) in violated.iter().take(CUTS_PER_ROUND) {
            selected[i].push(k);
            added += 1;
        }
    }
    Ok(added)
}

/// Turns the cut model into `min ||x - x_ref||^2` under the level row.
fn projection_program(problem: &StructuredProblem, mut lp: LinearProgram, x_ref: &[f64], target: f64) -> LinearProgram {
    let level: Vec<(usize, f64)> = lp.objective.iter().copied().enumerate().collect();
    lp.add_row(level, RowSense::Le, target);
    // fixed columns add a constant to the distance and are left out of Q
    let cols = lp.num_cols();
    let mut q = SparseMatrix::new(cols, cols);
    lp.objective = vec![0.0; cols];
    lp.objective_offset = 0.0;
    let (lo, up) = (&problem.master.x_lower, &problem.master.x_upper);
    for (j, r) in x_ref.iter().enumerate() {
        if lo[j] < up[j] {
            q.push(j, j, 2.0);
            lp.objective[j] = -2.0 * r;
            lp.objective_offset += r * r;
        } else {
            lp.objective_offset += (lo[j] - r) * (lo[j] - r);
        }
    }
    lp.quadratic = Some(q);
    lp
}
