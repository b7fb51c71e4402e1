//! Adaptive oracles over a store of exactly solved subproblems.
//!
//! The subproblem value `g(x, c)` is convex and decreasing in `x`, and
//! concave, increasing and positively homogeneous in `c`. For a store of
//! solved points `(x_k, c_k, theta_k, lam_k, phi_k)`:
//!
//! * lower oracle: `max sum_k u_k (theta_k + lam_k^T (x - x_k))` over `u >= 0`
//!   with `sum_k u_k c_k <= c`. Any feasible `u` gives an affine minorant of
//!   `g(., c)`, so the answer is a valid cut with slope `sum_k u_k lam_k`.
//! * upper oracle: `min sum_k u_k c^T phi_k` over the simplex with
//!   `sum_k u_k x_k <= x`. The matching convex combination of the stored
//!   operational solutions is feasible at `sum_k u_k x_k`, and `g` decreases
//!   towards `x`.
//!
//! Both programs are feasible everywhere once the store holds a solve at the
//! componentwise-minimal point `(x_floor, c_floor)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, RowSense, SolverOptions};
use crate::problem::StructuredProblem;
use crate::sparse::dot;
use crate::subproblem::{ExactSolution, SubproblemSolver};

const DUPLICATE_TOL: f64 = 1e-10;
const DOMAIN_TOL: f64 = 1e-6;
const PRICING_TOL: f64 = 1e-9;

pub const CHECKPOINT_FORMAT: &str = "benders-solved-points";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedPoint {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub theta: f64,
    pub lam: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SolvedPoint {
    pub fn from_exact(x: Vec<f64>, c: Vec<f64>, sol: ExactSolution) -> Self {
        Self {
            x,
            c,
            theta: sol.theta,
            lam: sol.lam,
            phi: sol.phi,
        }
    }

    fn matches(&self, x: &[f64], c: &[f64]) -> bool {
        let close = |a: &f64, b: &f64| (a - b).abs() <= DUPLICATE_TOL * (1.0 + a.abs());
        self.x.iter().zip(x).all(|(a, b)| close(a, b)) && self.c.iter().zip(c).all(|(a, b)| close(a, b))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolvedPointStore {
    x_floor: Vec<f64>,
    c_floor: Vec<f64>,
    points: Vec<SolvedPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerAnswer {
    pub theta: f64,
    pub lam: Vec<f64>,
    pub weights: Vec<f64>,
    pub solve_time_s: f64,
    duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperAnswer {
    pub theta: f64,
    pub phi: Vec<f64>,
    pub weights: Vec<f64>,
    pub solve_time_s: f64,
    duals: Vec<f64>,
    /// Coordinates where the query sits on the lowest stored value.
    tight: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAnswer {
    pub theta_lo: f64,
    pub lam_lo: Vec<f64>,
    pub theta_hi: f64,
    pub phi_hi: Vec<f64>,
}

impl OracleAnswer {
    pub fn gap(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }
}

/// Componentwise infimum of every node view over the master feasible set.
pub fn node_view_floor(
    problem: &StructuredProblem,
    backend: &dyn LpBackend,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let master = &problem.master;
    let mut base = LinearProgram::new();
    master.append_to(&mut base);
    let mut constrained = vec![false; master.x_dim()];
    for &(_, c, _) in &master.constraints.entries {
        constrained[c] = true;
    }
    let mut cache = std::collections::HashMap::<Vec<(usize, u64)>, f64>::new();
    let mut floor = vec![f64::INFINITY; problem.template.x_dim()];
    for node in &problem.nodes {
        for (k, row) in node.selector.row_lists().into_iter().enumerate() {
            let key: Vec<(usize, u64)> = row.iter().map(|&(c, v)| (c, v.to_bits())).collect();
            let value = if let Some(v) = cache.get(&key) {
                *v
            } else {
                let v = match row.as_slice() {
                    [] => 0.0,
                    [(c, s)] if master.x_lower[*c] == master.x_upper[*c] || !constrained[*c] => {
                        if *s >= 0.0 {
                            s * master.x_lower[*c]
                        } else {
                            s * master.x_upper[*c]
                        }
                    }
                    _ => {
                        let mut lp = base.clone();
                        lp.objective = vec![0.0; master.x_dim()];
                        for &(c, s) in &row {
                            lp.objective[c] += s;
                        }
                        let out = backend.solve(&lp, opts)?;
                        if !out.is_optimal() {
                            return Err(Error::solve("infimum of a node-view component over the master set", out.status));
                        }
                        out.objective
                    }
                };
                cache.insert(key, v);
                v
            };
            floor[k] = floor[k].min(value);
        }
    }
    Ok(floor)
}

/// Solves the subproblem at `(x_floor, c_floor)` and returns the one-point store.
pub fn seed(
    problem: &StructuredProblem,
    backend: &dyn LpBackend,
    opts: &SolverOptions,
) -> Result<SolvedPointStore> {
    problem.ensure_valid()?;
    let x_floor = node_view_floor(problem, backend, opts)?;
    if let Some(k) = x_floor.iter().position(|v| !v.is_finite()) {
        return Err(Error::OracleDomain(format!(
            "node-view component {k} is unbounded below over the master set"
        )));
    }
    let mut c_floor = vec![f64::INFINITY; problem.template.cost_dim()];
    for node in &problem.nodes {
        for (m, &c) in node.cost.iter().enumerate() {
            c_floor[m] = c_floor[m].min(c);
        }
    }
    let solver = SubproblemSolver::new(&problem.template);
    let sol = solver.evaluate(&x_floor, &c_floor, backend, opts)?;
    Ok(SolvedPointStore {
        points: vec![SolvedPoint::from_exact(x_floor.clone(), c_floor.clone(), sol)],
        x_floor,
        c_floor,
    })
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    #[serde(flatten)]
    store: SolvedPointStore,
}

impl SolvedPointStore {
    pub fn from_seed(x_floor: Vec<f64>, c_floor: Vec<f64>, seed: SolvedPoint) -> Self {
        Self {
            x_floor,
            c_floor,
            points: vec![seed],
        }
    }

    pub fn x_floor(&self) -> &[f64] {
        &self.x_floor
    }

    pub fn c_floor(&self) -> &[f64] {
        &self.c_floor
    }

    pub fn points(&self) -> &[SolvedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Adds a solved point; exact duplicates of a stored `(x, c)` are skipped.
    pub fn insert(&mut self, point: SolvedPoint) -> bool {
        if self.points.iter().any(|p| p.matches(&point.x, &point.c)) {
            log::debug!("skipping duplicate solved point");
            return false;
        }
        let residual = (point.theta - dot(&point.c, &point.phi)).abs();
        debug_assert!(residual <= 1e-6 * (1.0 + point.theta.abs()), "theta != c^T phi");
        self.points.push(point);
        true
    }

    fn check_cost(&self, c: &[f64]) -> Result<()> {
        for (m, (&lo, &v)) in self.c_floor.iter().zip(c).enumerate() {
            if v < lo - DOMAIN_TOL * (1.0 + lo.abs()) {
                return Err(Error::OracleDomain(format!(
                    "cost component {m} is {v}, below the seeded floor {lo}"
                )));
            }
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        for (m, (&lo, v)) in self.x_floor.iter().zip(out.iter_mut()).enumerate() {
            if *v < lo {
                if *v < lo - DOMAIN_TOL * (1.0 + lo.abs()) {
                    return Err(Error::OracleDomain(format!(
                        "component {m} is {v}, below the seeded floor {lo}"
                    )));
                }
                *v = lo;
            }
        }
        Ok(out)
    }

    fn lower_weight(&self, k: usize, x: &[f64]) -> f64 {
        let p = &self.points[k];
        p.theta + p.lam.iter().zip(x.iter().zip(&p.x)).map(|(l, (a, b))| l * (a - b)).sum::<f64>()
    }

    pub fn lower(
        &self,
        x: &[f64],
        c: &[f64],
        backend: &dyn LpBackend,
        opts: &SolverOptions,
    ) -> Result<LowerAnswer> {
        self.check_cost(c)?;
        let weights: Vec<f64> = (0..self.points.len()).map(|k| self.lower_weight(k, x)).collect();
        let obj_scale = scale_of(weights.iter());
        let mut lp = LinearProgram::new();
        for w in &weights {
            lp.add_col(-w / obj_scale, 0.0, f64::INFINITY);
        }
        let mut row_scale = Vec::with_capacity(c.len());
        for (m, &cm) in c.iter().enumerate() {
            let s = scale_of(self.points.iter().map(|p| &p.c[m]).chain([&cm]));
            let entries = self.points.iter().enumerate().map(|(k, p)| (k, p.c[m] / s));
            lp.add_row(entries, RowSense::Le, cm / s);
            row_scale.push(s);
        }
        let out = backend.solve(&lp, opts)?;
        if !out.is_optimal() {
            return Err(Error::solve("lower-bound oracle", out.status));
        }
        let mut u: Vec<f64> = out.primal.iter().map(|v| v.max(0.0)).collect();
        // shrink onto the feasible side so the cut stays valid despite solver tolerance
        let mut shrink: f64 = 1.0;
        for (m, &cm) in c.iter().enumerate() {
            let used: f64 = u.iter().zip(&self.points).map(|(u, p)| u * p.c[m]).sum();
            if used > cm {
                shrink = shrink.min(if used > 0.0 { cm / used } else { 0.0 });
            }
        }
        if shrink < 1.0 {
            u.iter_mut().for_each(|v| *v *= shrink);
        }
        let mut lam = vec![0.0; x.len()];
        let mut theta = 0.0;
        for ((u, p), w) in u.iter().zip(&self.points).zip(&weights) {
            if *u != 0.0 {
                theta += u * w;
                for (l, pl) in lam.iter_mut().zip(&p.lam) {
                    *l += u * pl;
                }
            }
        }
        let duals = out.duals.iter().zip(&row_scale).map(|(d, s)| d * obj_scale / s).collect();
        Ok(LowerAnswer {
            theta,
            lam,
            weights: u,
            solve_time_s: out.solve_time_s,
            duals,
        })
    }

    pub fn upper(
        &self,
        x: &[f64],
        c: &[f64],
        backend: &dyn LpBackend,
        opts: &SolverOptions,
    ) -> Result<UpperAnswer> {
        let x = self.check_point(x)?;
        let costs: Vec<f64> = self.points.iter().map(|p| dot(c, &p.phi)).collect();
        let obj_scale = scale_of(costs.iter());
        // with the weights summing to one, each row reads sum_k u_k (x_k - x) <= 0
        let diffs: Vec<Vec<f64>> = x
            .iter()
            .enumerate()
            .map(|(m, &xm)| {
                let s = scale_of(self.points.iter().map(|p| &p.x[m]).chain([&xm]));
                self.points
                    .iter()
                    .map(|p| {
                        let d = p.x[m] - xm;
                        if d.abs() <= DUPLICATE_TOL * s { 0.0 } else { d }
                    })
                    .collect()
            })
            .collect();
        // a row no stored point lies strictly below forbids every point above it
        let mut excluded = vec![false; self.points.len()];
        let mut tight = Vec::new();
        let mut kept = Vec::new();
        for (m, d) in diffs.iter().enumerate() {
            if d.iter().all(|&v| v <= 0.0) {
                continue;
            }
            if d.iter().all(|&v| v >= 0.0) {
                for (k, &v) in d.iter().enumerate() {
                    excluded[k] |= v > 0.0;
                }
                tight.push(m);
                continue;
            }
            kept.push(m);
        }
        let mut lp = LinearProgram::new();
        for (v, &out) in costs.iter().zip(&excluded) {
            lp.add_col(v / obj_scale, 0.0, if out { 0.0 } else { f64::INFINITY });
        }
        lp.add_row((0..self.points.len()).map(|k| (k, 1.0)), RowSense::Eq, 1.0);
        let mut row_scale = Vec::with_capacity(kept.len());
        for &m in &kept {
            let s = scale_of(diffs[m].iter());
            let entries = diffs[m]
                .iter()
                .enumerate()
                .filter(|&(k, _)| !excluded[k])
                .map(|(k, &v)| (k, v / s));
            lp.add_row(entries, RowSense::Le, 0.0);
            row_scale.push(s);
        }
        let out = backend.solve(&lp, opts)?;
        if !out.is_optimal() {
            return Err(Error::solve("upper-bound oracle", out.status));
        }
        let u: Vec<f64> = out.primal.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = u.iter().sum();
        let mut phi = vec![0.0; self.points[0].phi.len()];
        let mut theta = 0.0;
        for ((u, p), v) in u.iter().zip(&self.points).zip(&costs) {
            if *u != 0.0 {
                theta += u * v / total;
                for (f, pf) in phi.iter_mut().zip(&p.phi) {
                    *f += u * pf / total;
                }
            }
        }
        // back to the form sum_k u_k x_k <= x, where the simplex dual absorbs the shift
        let mut duals = vec![0.0; 1 + x.len()];
        duals[0] = out.duals[0] * obj_scale;
        for (r, (&m, s)) in kept.iter().zip(&row_scale).enumerate() {
            let d = out.duals[1 + r] * obj_scale / s;
            duals[1 + m] = d;
            duals[0] -= d * x[m];
        }
        Ok(UpperAnswer {
            theta,
            phi,
            weights: u,
            solve_time_s: out.solve_time_s,
            duals,
            tight,
        })
    }

    pub fn query(
        &self,
        x: &[f64],
        c: &[f64],
        backend: &dyn LpBackend,
        opts: &SolverOptions,
    ) -> Result<OracleAnswer> {
        let lo = self.lower(x, c, backend, opts)?;
        let hi = self.upper(x, c, backend, opts)?;
        Ok(combine(&lo, &hi))
    }

    pub fn to_checkpoint(&self) -> serde_json::Result<String> {
        serde_json::to_string(&Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            store: self.clone(),
        })
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("unreadable store checkpoint: {e}")))?;
        if cp.format != CHECKPOINT_FORMAT || cp.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint {} v{}",
                cp.format, cp.version
            )));
        }
        if cp.store.points.is_empty() {
            return Err(Error::Config("checkpoint holds no seed point".into()));
        }
        Ok(cp.store)
    }
}

/// Largest magnitude among `values`, or 1 when all are zero.
fn scale_of<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    let m = values.fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 && m.is_finite() {
        m
    } else {
        1.0
    }
}

fn combine(lo: &LowerAnswer, hi: &UpperAnswer) -> OracleAnswer {
    // both sides are bounds on the same number; rounding can cross them by ulps
    let theta_hi = hi.theta.max(lo.theta);
    OracleAnswer {
        theta_lo: lo.theta,
        lam_lo: lo.lam.clone(),
        theta_hi,
        phi_hi: hi.phi.clone(),
    }
}

/// Oracle answers at a fixed query, refreshed lazily as the store grows.
///
/// New points are priced against the stored optimal duals; the programs are
/// only re-solved when some new column can improve the answer.
#[derive(Debug, Clone)]
pub struct OracleCache {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    lower: LowerAnswer,
    upper: UpperAnswer,
    seen: usize,
    solve_time_s: f64,
}

impl OracleCache {
    pub fn new(
        store: &SolvedPointStore,
        x: Vec<f64>,
        c: Vec<f64>,
        backend: &dyn LpBackend,
        opts: &SolverOptions,
    ) -> Result<Self> {
        let lower = store.lower(&x, &c, backend, opts)?;
        let upper = store.upper(&x, &c, backend, opts)?;
        let solve_time_s = lower.solve_time_s + upper.solve_time_s;
        Ok(Self {
            x,
            c,
            lower,
            upper,
            seen: store.len(),
            solve_time_s,
        })
    }

    /// Solver time spent on this query since the last call.
    pub fn take_solve_time(&mut self) -> f64 {
        std::mem::take(&mut self.solve_time_s)
    }

    pub fn answer(&self) -> OracleAnswer {
        combine(&self.lower, &self.upper)
    }

    /// Brings the answer up to date with `store`; returns how many of the two
    /// programs had to be re-solved.
    pub fn refresh(
        &mut self,
        store: &SolvedPointStore,
        backend: &dyn LpBackend,
        opts: &SolverOptions,
    ) -> Result<usize> {
        if store.len() == self.seen {
            return Ok(0);
        }
        let fresh = self.seen..store.len();
        let mut solved = 0;

        let tol_lo = PRICING_TOL * (1.0 + self.lower.theta.abs());
        let improves_lower = fresh.clone().any(|k| {
            let p = &store.points[k];
            let reduced = -store.lower_weight(k, &self.x) - dot(&self.lower.duals, &p.c);
            reduced < -tol_lo
        });
        if improves_lower {
            self.lower = store.lower(&self.x, &self.c, backend, opts)?;
            self.solve_time_s += self.lower.solve_time_s;
            solved += 1;
        }

        let tol_hi = PRICING_TOL * (1.0 + self.upper.theta.abs());
        let improves_upper = fresh.clone().any(|k| {
            let p = &store.points[k];
            let tight = &self.upper.tight;
            if tight.iter().any(|&m| p.x[m] < self.x[m]) {
                return true;
            }
            if tight.iter().any(|&m| p.x[m] > self.x[m]) {
                return false;
            }
            let d = &self.upper.duals;
            let reduced = dot(&self.c, &p.phi) - d[0] - dot(&d[1..], &p.x);
            reduced < -tol_hi
        });
        if improves_upper {
            self.upper = store.upper(&self.x, &self.c, backend, opts)?;
            self.solve_time_s += self.upper.solve_time_s;
            solved += 1;
        }
        self.seen = store.len();
        Ok(solved)
    }
}
