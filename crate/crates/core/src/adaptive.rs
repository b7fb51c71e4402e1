//! Benders decomposition with adaptive oracles, optionally stabilised by the
//! level-set method.
//!
//! Each outer iteration solves the relaxed master, picks a query point (the
//! master optimiser, or its projection onto the target level set), asks both
//! oracles about every node at that point and then exactly solves a few
//! subproblems, largest probability-weighted gap first, until the inner stop
//! rule fires. Every refresh of the oracles appends one inexact cut per node.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cuts::{Cut, CutPool};
use crate::error::{Error, Result};
use crate::level_set::{
    compute_target, improvement_ratio, solve_lmp, update_gamma, StabilisationConfig, TargetState,
    WorkingSet,
};
use crate::lp::{LpBackend, SolverOptions};
use crate::master::solve_rmp;
use crate::oracles::{seed, OracleAnswer, OracleCache, SolvedPoint, SolvedPointStore};
use crate::problem::{node_view, StructuredProblem};
use crate::run::{relative_gap, within_tolerance, IterationRecord, RunResult, RunStatus};
use crate::sparse::distance;
use crate::standard::{thread_pool, DEFAULT_BETA_FLOOR};
use crate::subproblem::SubproblemSolver;

const ZERO_GAP: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Relative tolerance in percent.
    pub eps: f64,
    /// `None` runs the unstabilised variant: master optimiser as query point
    /// and a single exact solve per iteration.
    pub stabilisation: Option<StabilisationConfig>,
    pub iter_limit: usize,
    /// Overrides the exact solves allowed per outer iteration
    /// (default: 1 unstabilised, the node count stabilised).
    pub inner_cap: Option<usize>,
    pub threads: usize,
    pub beta_floor: f64,
    pub solver: SolverOptions,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            stabilisation: None,
            iter_limit: 5000,
            inner_cap: None,
            threads: 1,
            beta_floor: DEFAULT_BETA_FLOOR,
            solver: SolverOptions::default(),
        }
    }
}

impl EngineConfig {
    pub fn stabilised(stab: StabilisationConfig) -> Self {
        Self {
            stabilisation: Some(stab),
            ..Self::default()
        }
    }

    pub fn engine_name(&self) -> &'static str {
        if self.stabilisation.is_some() {
            "stabilised"
        } else {
            "adaptive"
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.inner_cap == Some(0) {
            return Err(Error::Config("inner cap must be at least 1".into()));
        }
        match &self.stabilisation {
            Some(s) => s.validate(),
            None => Ok(()),
        }
    }
}

/// Node maximising `pi_i * gap_i`; the smallest id wins ties.
pub fn select_subproblem(answers: &[OracleAnswer], probabilities: &[f64]) -> usize {
    let mut best = 0;
    let mut best_gap = f64::NEG_INFINITY;
    for (i, (a, p)) in answers.iter().zip(probabilities).enumerate() {
        let g = p * a.gap();
        if g > best_gap {
            best = i;
            best_gap = g;
        }
    }
    best
}

pub fn inner_stop(
    u_ubo: f64,
    l_lbo: f64,
    u_star_prev: f64,
    l_star_prev: f64,
    n: usize,
    node_count: usize,
) -> bool {
    u_ubo - l_lbo <= u_star_prev - l_star_prev || n > node_count || l_lbo >= u_star_prev
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InnerLoopStats {
    /// Exact solves per outer iteration.
    pub solves: Vec<usize>,
    /// Oracle programs re-solved after pricing found an improving point.
    pub oracle_resolves: usize,
    /// Oracle refreshes answered from the memo.
    pub oracle_hits: usize,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub result: RunResult,
    pub store: SolvedPointStore,
    pub stats: InnerLoopStats,
}

pub fn run_adaptive(
    problem: &StructuredProblem,
    cfg: &EngineConfig,
    backend: &dyn LpBackend,
) -> Result<RunResult> {
    run_adaptive_with_store(problem, cfg, backend, None).map(|r| r.result)
}

/// As [`run_adaptive`], optionally starting from a previously saved store.
pub fn run_adaptive_with_store(
    problem: &StructuredProblem,
    cfg: &EngineConfig,
    backend: &dyn LpBackend,
    initial: Option<SolvedPointStore>,
) -> Result<AdaptiveRun> {
    cfg.validate()?;
    problem.ensure_valid()?;
    let started = Instant::now();
    let pool = thread_pool(cfg.threads)?;
    let opts = &cfg.solver;
    let solver = SubproblemSolver::new(&problem.template);
    let nodes = problem.node_count();
    let probabilities: Vec<f64> = problem.nodes.iter().map(|n| n.pi).collect();
    let inner_cap = cfg.inner_cap.unwrap_or(if cfg.stabilisation.is_some() { nodes } else { 1 });

    let mut evaluations = 0;
    let mut solver_time = 0.0;
    let mut store = match initial {
        Some(s) => {
            if s.x_floor().len() != problem.template.x_dim() || s.c_floor().len() != problem.template.cost_dim() {
                return Err(Error::Config("saved store does not match the problem dimensions".into()));
            }
            s
        }
        None => {
            let s = seed(problem, backend, opts)?;
            evaluations += 1;
            s
        }
    };

    let mut pools = CutPool::new(nodes, cfg.beta_floor);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut incumbent = Vec::new();
    let mut records = Vec::new();
    let mut trajectory: Vec<Vec<f64>> = Vec::new();
    let mut x_ref: Option<Vec<f64>> = None;
    let mut target_state = cfg.stabilisation.as_ref().map(TargetState::new);
    let mut stats = InnerLoopStats::default();
    let mut status = RunStatus::IterationLimit;
    let mut kept_caches: Vec<OracleCache> = Vec::new();
    let mut working = WorkingSet::default();

    for j in 1..=cfg.iter_limit {
        let lower_prev = lower;
        let upper_prev = upper;
        let rmp = solve_rmp(problem, &pools, backend, opts).map_err(|e| e.at(j))?;
        solver_time += rmp.solve_time_s;
        lower = lower.max(rmp.lower_bound);

        let gamma = target_state.as_ref().map(|s| s.gamma);
        let mut target = None;
        let mut level_value = None;
        let x_query = match gamma {
            None => rmp.x.clone(),
            Some(g) => {
                let reference = x_ref.get_or_insert_with(|| rmp.x.clone()).clone();
                let t = compute_target(lower, upper_prev, g);
                target = Some(t);
                if t.is_finite() {
                    let lmp = solve_lmp(
                        problem,
                        &pools,
                        &reference,
                        t,
                        (&rmp.x, &rmp.beta),
                        &mut working,
                        backend,
                        opts,
                    )
                    .map_err(|e| e.at(j))?;
                    solver_time += lmp.solve_time_s;
                    level_value = Some(lmp.level_value);
                    lmp.x
                } else {
                    reference
                }
            }
        };

        let views: Vec<Vec<f64>> = problem
            .nodes
            .iter()
            .map(|n| node_view(&x_query, n))
            .collect::<Result<_>>()?;
        // a node whose query did not move keeps its answers, brought up to date
        let mut previous: Vec<Option<OracleCache>> = std::mem::take(&mut kept_caches)
            .into_iter()
            .map(Some)
            .collect();
        previous.resize_with(nodes, || None);
        let mut caches: Vec<OracleCache> = pool
            .install(|| {
                problem
                    .nodes
                    .par_iter()
                    .zip(views.par_iter())
                    .zip(previous.into_par_iter())
                    .map(|((n, v), prev)| match prev {
                        Some(mut c) if c.x == *v && c.c == n.cost => {
                            c.refresh(&store, backend, opts)?;
                            Ok(c)
                        }
                        _ => OracleCache::new(&store, v.clone(), n.cost.clone(), backend, opts),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .map_err(|e| e.at(j))?;
        let f_query = problem.master.cost(&x_query);
        let mut answers: Vec<OracleAnswer> = caches.iter().map(OracleCache::answer).collect();

        let mut n = 0;
        loop {
            let k = select_subproblem(&answers, &probabilities);
            let a = &answers[k];
            let gap_tol = ZERO_GAP * (1.0 + a.theta_hi.abs());
            if a.gap() * probabilities[k] > gap_tol || n == 0 && a.gap() > gap_tol {
                let node = &problem.nodes[k];
                let sol = solver
                    .evaluate(&views[k], &node.cost, backend, opts)
                    .map_err(|e| e.at(j))?;
                solver_time += sol.solve_time_s;
                evaluations += 1;
                n += 1;
                store.insert(SolvedPoint::from_exact(views[k].clone(), node.cost.clone(), sol));
                let refreshed: Vec<usize> = pool
                    .install(|| {
                        caches
                            .par_iter_mut()
                            .map(|c| c.refresh(&store, backend, opts))
                            .collect::<Result<Vec<_>>>()
                    })
                    .map_err(|e| e.at(j))?;
                let resolved: usize = refreshed.iter().sum();
                stats.oracle_resolves += resolved;
                stats.oracle_hits += 2 * nodes - resolved;
                answers = caches.iter().map(OracleCache::answer).collect();
            }
            for (i, a) in answers.iter().enumerate() {
                pools.add(
                    problem,
                    i,
                    Cut {
                        anchor: views[i].clone(),
                        theta: a.theta_lo,
                        lam: a.lam_lo.clone(),
                    },
                );
            }
            let (l_lbo, u_ubo) = oracle_bounds(f_query, &answers, &probabilities);
            let all_tight = answers
                .iter()
                .all(|a| a.gap() <= ZERO_GAP * (1.0 + a.theta_hi.abs()));
            if n == 0
                || all_tight
                || n >= inner_cap
                || inner_stop(u_ubo, l_lbo, upper_prev, lower_prev, n, nodes)
            {
                break;
            }
        }
        stats.solves.push(n);
        solver_time += caches.iter_mut().map(OracleCache::take_solve_time).sum::<f64>();
        kept_caches = caches;

        let (l_lbo, u_ubo) = oracle_bounds(f_query, &answers, &probabilities);
        if u_ubo < upper {
            upper = u_ubo;
            incumbent = x_query.clone();
        }
        // the two bounds come from different solves and can cross by rounding
        lower = lower.min(upper);

        let mut ratio = None;
        if let (Some(state), Some(stab)) = (target_state.as_mut(), cfg.stabilisation.as_ref()) {
            // the ratio compares against the target just used
            state.target_prev = target;
            if let (Some(prev), Some(t)) = (state.l_lbo_prev, target) {
                ratio = improvement_ratio(prev, t, l_lbo);
            }
            if stab.dynamic {
                state.gamma = update_gamma(state, l_lbo, stab);
            }
            state.l_lbo_prev = Some(l_lbo);
            x_ref = Some(x_query.clone());
        }

        let step = trajectory.last().map_or(0.0, |prev| distance(prev, &x_query));
        trajectory.push(x_query);
        records.push(IterationRecord {
            iter: j,
            n_exact_cum: evaluations,
            l_star: lower,
            u_star: upper,
            l_lbo,
            u_ubo,
            gamma,
            target,
            wall_time_s: started.elapsed().as_secs_f64(),
            level_value,
            ratio,
            step_norm: step,
            solver_time_s: solver_time,
        });
        log::debug!(
            "{} it {j}: L*={lower:.6} U*={upper:.6} gap={:.3e} solves={n}",
            cfg.engine_name(),
            relative_gap(lower, upper)
        );
        if within_tolerance(lower, upper, cfg.eps) {
            status = RunStatus::Converged;
            break;
        }
    }

    let result = RunResult {
        engine: cfg.engine_name().into(),
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
    };
    Ok(AdaptiveRun { result, store, stats })
}

/// `(f + sum pi theta_lo, f + sum pi theta_hi)` at the query point.
fn oracle_bounds(f: f64, answers: &[OracleAnswer], probabilities: &[f64]) -> (f64, f64) {
    let mut lo = f;
    let mut hi = f;
    for (a, p) in answers.iter().zip(probabilities) {
        lo += p * a.theta_lo;
        hi += p * a.theta_hi;
    }
    (lo, hi)
}
