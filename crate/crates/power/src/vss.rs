//! Value of the stochastic solution: the extra cost of committing to the
//! root investments of the expected-value problem.

use benders_core::lp::{LpBackend, SolverOptions};
use benders_core::problem::{assemble_monolithic, DEFAULT_MONOLITHIC_CAP};
use benders_core::StructuredProblem;
use serde::{Deserialize, Serialize};

use crate::error::{PowerError, Result};
use crate::model::{build_master, build_model, fix_root_installs, root_installs, PowerInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VssReport {
    pub stochastic_optimum: f64,
    pub expected_value_optimum: f64,
    /// Stochastic cost with the root installs fixed to the expected-value plan.
    pub ev_policy_cost: f64,
    pub vss: f64,
    pub vss_percent: f64,
    pub ev_root_installs: Vec<f64>,
}

/// Optimal value and master solution of a structured problem.
pub type Solve<'a> = dyn Fn(&StructuredProblem) -> Result<(f64, Vec<f64>)> + 'a;

/// Solves the extensive form directly.
pub fn solve_monolithic(problem: &StructuredProblem, backend: &dyn LpBackend, opts: &SolverOptions) -> Result<(f64, Vec<f64>)> {
    let mono = assemble_monolithic(problem, DEFAULT_MONOLITHIC_CAP)?;
    let out = backend.solve(&mono.lp, opts).map_err(benders_core::Error::from)?;
    if !out.is_optimal() {
        return Err(PowerError::Solver(benders_core::Error::Solve {
            context: "extensive form".into(),
            status: out.status,
        }));
    }
    Ok((out.objective, mono.master_part(&out.primal).to_vec()))
}

pub fn compute_vss(inst: &PowerInstance, solve: &Solve) -> Result<VssReport> {
    let model = build_model(inst)?;
    let (z_sp, _) = solve(&model.problem)?;
    if model.tree.is_deterministic() {
        return Ok(VssReport {
            stochastic_optimum: z_sp,
            expected_value_optimum: z_sp,
            ev_policy_cost: z_sp,
            vss: 0.0,
            vss_percent: 0.0,
            ev_root_installs: Vec::new(),
        });
    }

    let ev_tree = model.tree.expected_value_tree();
    let (master, nodes, ev_layout) = build_master(inst, &ev_tree);
    let ev_problem = StructuredProblem {
        master,
        template: model.problem.template.clone(),
        nodes,
    };
    let (z_ev, x_ev) = solve(&ev_problem)?;
    let plan = root_installs(&x_ev, &ev_layout);

    let mut fixed = model.problem.clone();
    fix_root_installs(&mut fixed, &model.layout, &plan);
    let (eev, _) = solve(&fixed)?;
    let vss = eev - z_sp;
    Ok(VssReport {
        stochastic_optimum: z_sp,
        expected_value_optimum: z_ev,
        ev_policy_cost: eev,
        vss,
        vss_percent: 100.0 * vss / z_sp.abs().max(f64::MIN_POSITIVE),
        ev_root_installs: plan,
    })
}
