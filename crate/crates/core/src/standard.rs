//! Exact Benders: every subproblem is solved at every iteration and one exact
//! cut per node is added.

use std::time::Instant;

use rayon::prelude::*;

use crate::cuts::{Cut, CutPool};
use crate::error::{Error, Result};
use crate::lp::{LpBackend, SolverOptions};
use crate::master::solve_rmp;
use crate::problem::{node_view, DecisionNode, StructuredProblem};
use crate::run::{relative_gap, within_tolerance, IterationRecord, RunResult, RunStatus};
use crate::sparse::distance;
use crate::subproblem::{ExactSolution, SubproblemSolver};

/// Lower bound on every epigraph variable; valid because operating costs and
/// penalties are nonnegative.
pub const DEFAULT_BETA_FLOOR: f64 = 0.0;

#[derive(Debug, Clone)]
pub struct StandardConfig {
    /// Relative tolerance in percent.
    pub eps: f64,
    pub iter_limit: usize,
    pub threads: usize,
    pub beta_floor: f64,
    pub solver: SolverOptions,
}

impl Default for StandardConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            iter_limit: 5000,
            threads: 1,
            beta_floor: DEFAULT_BETA_FLOOR,
            solver: SolverOptions::default(),
        }
    }
}

pub fn evaluate_exact(
    solver: &SubproblemSolver,
    node: &DecisionNode,
    x_i: &[f64],
    backend: &dyn LpBackend,
    opts: &SolverOptions,
) -> Result<ExactSolution> {
    solver.evaluate(x_i, &node.cost, backend, opts)
}

pub(crate) fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
}

pub fn run_standard(
    problem: &StructuredProblem,
    cfg: &StandardConfig,
    backend: &dyn LpBackend,
) -> Result<RunResult> {
    if !(cfg.eps > 0.0) {
        return Err(Error::Config(format!("eps must be positive, got {}", cfg.eps)));
    }
    problem.ensure_valid()?;
    let started = Instant::now();
    let pool = thread_pool(cfg.threads)?;
    let solver = SubproblemSolver::new(&problem.template);
    let opts = &cfg.solver;

    let mut pools = CutPool::new(problem.node_count(), cfg.beta_floor);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut incumbent = Vec::new();
    let mut records = Vec::new();
    let mut trajectory: Vec<Vec<f64>> = Vec::new();
    let mut evaluations = 0;
    let mut solver_time = 0.0;
    let mut status = RunStatus::IterationLimit;

    for j in 1..=cfg.iter_limit {
        let rmp = solve_rmp(problem, &pools, backend, opts).map_err(|e| e.at(j))?;
        solver_time += rmp.solve_time_s;
        lower = lower.max(rmp.lower_bound);

        let views: Vec<Vec<f64>> = problem
            .nodes
            .iter()
            .map(|n| node_view(&rmp.x, n))
            .collect::<Result<_>>()?;
        let solutions: Vec<ExactSolution> = pool
            .install(|| {
                problem
                    .nodes
                    .par_iter()
                    .zip(views.par_iter())
                    .map(|(n, x_i)| evaluate_exact(&solver, n, x_i, backend, opts))
                    .collect::<Result<Vec<_>>>()
            })
            .map_err(|e| e.at(j))?;
        evaluations += solutions.len();
        solver_time += solutions.iter().map(|s| s.solve_time_s).sum::<f64>();

        let thetas: Vec<f64> = solutions.iter().map(|s| s.theta).collect();
        let value = problem.total_cost(&rmp.x, &thetas);
        if value < upper {
            upper = value;
            incumbent = rmp.x.clone();
        }
        // the two bounds come from different solves and can cross by rounding
        lower = lower.min(upper);
        for (i, (sol, x_i)) in solutions.into_iter().zip(views).enumerate() {
            pools.add(
                problem,
                i,
                Cut {
                    anchor: x_i,
                    theta: sol.theta,
                    lam: sol.lam,
                },
            );
        }

        let step = trajectory.last().map_or(0.0, |prev| distance(prev, &rmp.x));
        trajectory.push(rmp.x);
        records.push(IterationRecord {
            iter: j,
            n_exact_cum: evaluations,
            l_star: lower,
            u_star: upper,
            l_lbo: value,
            u_ubo: value,
            gamma: None,
            target: None,
            wall_time_s: started.elapsed().as_secs_f64(),
            level_value: None,
            ratio: None,
            step_norm: step,
            solver_time_s: solver_time,
        });
        log::debug!(
            "standard it {j}: L*={lower:.6} U*={upper:.6} gap={:.3e}",
            relative_gap(lower, upper)
        );
        if within_tolerance(lower, upper, cfg.eps) {
            status = RunStatus::Converged;
            break;
        }
    }

    Ok(RunResult {
        engine: "standard".into(),
        status,
        iterations: records.len(),
        exact_evaluations: evaluations,
        lower_bound: lower,
        upper_bound: upper,
        incumbent,
        records,
        wall_time_s: started.elapsed().as_secs_f64(),
        solver_time_s: solver_time,
        trajectory,
    })
}
