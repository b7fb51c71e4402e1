use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, SolverOptions};
use crate::problem::SubproblemTemplate;
use crate::sparse::dot;

/// Exact subproblem answer at `(x_i, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    /// `g(x_i, c)`.
    pub theta: f64,
    /// Subgradient of `g(., c)` at `x_i`, from the row duals: `B^T duals`.
    pub lam: Vec<f64>,
    /// `C y*`, so that `theta = c^T phi`.
    pub phi: Vec<f64>,
    pub y: Vec<f64>,
    pub solve_time_s: f64,
}

/// Prebuilt subproblem LP; only the objective and right-hand side change
/// between evaluations.
#[derive(Debug, Clone)]
pub struct SubproblemSolver {
    template: SubproblemTemplate,
    base: LinearProgram,
}

impl SubproblemSolver {
    pub fn new(template: &SubproblemTemplate) -> Self {
        let mut base = LinearProgram::new();
        for j in 0..template.y_dim() {
            base.add_col(0.0, template.y_lower[j], template.y_upper[j]);
        }
        for (r, row) in template.a.row_lists().into_iter().enumerate() {
            base.add_row(row, template.senses[r], 0.0);
        }
        Self {
            template: template.clone(),
            base,
        }
    }

    pub fn template(&self) -> &SubproblemTemplate {
        &self.template
    }

    pub fn program(&self, x_i: &[f64], cost: &[f64]) -> LinearProgram {
        let mut lp = self.base.clone();
        lp.objective = self.template.objective(cost);
        lp.rhs = self.template.b.mul_vec(x_i);
        lp
    }

    pub fn evaluate(
        &self,
        x_i: &[f64],
        cost: &[f64],
        backend: &dyn LpBackend,
        opts: &SolverOptions,
    ) -> Result<ExactSolution> {
        if x_i.len() != self.template.x_dim() {
            return Err(Error::Dimension {
                what: "subproblem right-hand side",
                expected: self.template.x_dim(),
                found: x_i.len(),
            });
        }
        if cost.len() != self.template.cost_dim() {
            return Err(Error::Dimension {
                what: "subproblem cost vector",
                expected: self.template.cost_dim(),
                found: cost.len(),
            });
        }
        let lp = self.program(x_i, cost);
        let out = backend.solve(&lp, opts)?;
        if !out.is_optimal() {
            return Err(Error::solve(
                format!(
                    "subproblem at x_i = {:?} (shed variables should make it always feasible)",
                    short(x_i)
                ),
                out.status,
            ));
        }
        let lam = self.template.b.transpose_mul_vec(&out.duals);
        let phi = self.template.cost_map.mul_vec(&out.primal);
        Ok(ExactSolution {
            theta: out.objective,
            lam,
            phi,
            y: out.primal,
            solve_time_s: out.solve_time_s,
        })
    }
}

fn short(v: &[f64]) -> Vec<f64> {
    v.iter().take(8).copied().collect()
}

/// `g(x_i, c)` without the subgradient; convenience for checks.
pub fn value(
    solver: &SubproblemSolver,
    x_i: &[f64],
    cost: &[f64],
    backend: &dyn LpBackend,
    opts: &SolverOptions,
) -> Result<f64> {
    solver.evaluate(x_i, cost, backend, opts).map(|s| s.theta)
}

impl ExactSolution {
    /// `|theta - c^T phi|` relative to `max(1, |theta|)`.
    pub fn identity_residual(&self, cost: &[f64]) -> f64 {
        (self.theta - dot(cost, &self.phi)).abs() / self.theta.abs().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::HighsBackend;
    use crate::problem::tests::toy;

    #[test]
    fn toy_values_and_duals() {
        let p = toy(1);
        let s = SubproblemSolver::new(&p.template);
        let opts = SolverOptions::default();
        // cap 1, demand 2, gen cost 1, shed 10 -> 1 + 10 = 11
        let sol = s.evaluate(&[1.0, -2.0], &[1.0, 10.0], &HighsBackend, &opts).unwrap();
        assert!((sol.theta - 11.0).abs() < 1e-9);
        assert!(sol.identity_residual(&[1.0, 10.0]) < 1e-12);
        // one more unit of capacity saves 9; one more unit of (negated) demand saves 10
        assert!((sol.lam[0] + 9.0).abs() < 1e-9);
        assert!((sol.lam[1] + 10.0).abs() < 1e-9);
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let p = toy(1);
        let s = SubproblemSolver::new(&p.template);
        let sol = s
            .evaluate(&[3.0, 0.0], &[1.0, 10.0], &HighsBackend, &SolverOptions::default())
            .unwrap();
        assert_eq!(sol.theta, 0.0);
        assert!(sol.phi.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wrong_dimension_is_an_error() {
        let p = toy(1);
        let s = SubproblemSolver::new(&p.template);
        assert!(s
            .evaluate(&[1.0], &[1.0, 10.0], &HighsBackend, &SolverOptions::default())
            .is_err());
    }
}
