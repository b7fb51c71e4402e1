//! Thin layer over the external LP/QP solver.
//!
//! Everything else in the crate talks to [`LpBackend`]; this is the only
//! module that touches HiGHS or Clarabel.
//!
//! Dual sign convention: `SolveOutcome::duals[r]` is the sensitivity of the
//! optimal objective to the right-hand side of row `r`, i.e. `d obj / d rhs_r`.
//! For a minimisation this makes duals of binding `<=` rows nonpositive and
//! duals of binding `>=` rows nonnegative. With a subproblem `A y <= B x` the
//! subgradient of its value with respect to `x` is then `B^T duals`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use highs::{ColProblem, HighsModelStatus, Model, Row, Sense};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::SparseMatrix;

/// Environment variable naming the backend: `highs` (default) or `clarabel`.
pub const BACKEND_ENV: &str = "BENDERS_LP_BACKEND";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("unknown LP backend `{0}` (available: highs, clarabel)")]
    UnknownBackend(String),
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("solver rejected the model: {0}")]
    Rejected(String),
    #[error("failed to write LP dump: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// `min c^T x + 1/2 x^T Q x + offset` subject to row constraints and bounds.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub matrix: SparseMatrix,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    /// Symmetric PSD matrix `Q`; the full matrix is stored, not a triangle.
    pub quadratic: Option<SparseMatrix>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_col(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.matrix.cols += 1;
        self.objective.len() - 1
    }

    pub fn add_row<I>(&mut self, entries: I, sense: RowSense, rhs: f64) -> usize
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let r = self.rhs.len();
        self.matrix.rows += 1;
        for (c, v) in entries {
            self.matrix.push(r, c, v);
        }
        self.senses.push(sense);
        self.rhs.push(rhs);
        r
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let mut v = self.objective_offset + crate::sparse::dot(&self.objective, x);
        if let Some(q) = &self.quadratic {
            let qx = q.mul_vec(x);
            v += 0.5 * crate::sparse::dot(x, &qx);
        }
        v
    }

    pub fn check(&self) -> Result<(), BackendError> {
        let n = self.num_cols();
        let m = self.num_rows();
        if self.col_lower.len() != n || self.col_upper.len() != n {
            return Err(BackendError::Malformed("bound vectors do not match column count".into()));
        }
        if self.senses.len() != m {
            return Err(BackendError::Malformed("sense vector does not match row count".into()));
        }
        if self.matrix.rows != m || self.matrix.cols != n {
            return Err(BackendError::Malformed(format!(
                "matrix is {}x{} but program has {m} rows and {n} columns",
                self.matrix.rows, self.matrix.cols
            )));
        }
        if let Some((r, c, _)) = self.matrix.entries.iter().find(|(r, c, _)| *r >= m || *c >= n) {
            return Err(BackendError::Malformed(format!("entry ({r},{c}) out of range")));
        }
        if let Some(q) = &self.quadratic {
            if q.rows != n || q.cols != n {
                return Err(BackendError::Malformed("quadratic term has wrong dimension".into()));
            }
            if !certified_psd(q) {
                return Err(BackendError::Malformed(
                    "quadratic term is not symmetric diagonally dominant PSD".into(),
                ));
            }
        }
        Ok(())
    }

    /// Writes the program in CPLEX LP text format.
    pub fn write_lp<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut obj = String::new();
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                write!(obj, " {:+} x{}", c, j).unwrap();
            }
        }
        if let Some(q) = &self.quadratic {
            let mut quad = String::new();
            for &(r, c, v) in &q.entries {
                if r == c {
                    write!(quad, " {:+} x{} ^2", v, r).unwrap();
                } else if r < c {
                    write!(quad, " {:+} x{} * x{}", 2.0 * v, r, c).unwrap();
                }
            }
            if !quad.is_empty() {
                write!(obj, " + [{} ] / 2", quad).unwrap();
            }
        }
        if obj.is_empty() {
            obj.push_str(" 0 x0");
        }
        writeln!(w, "\\ objective offset {}", self.objective_offset)?;
        writeln!(w, "Minimize\n obj:{}", obj)?;
        writeln!(w, "Subject To")?;
        for (r, row) in self.matrix.row_lists().iter().enumerate() {
            let mut line = String::new();
            for &(c, v) in row {
                write!(line, " {:+} x{}", v, c).unwrap();
            }
            if line.is_empty() {
                line.push_str(" 0 x0");
            }
            let op = match self.senses[r] {
                RowSense::Le => "<=",
                RowSense::Eq => "=",
                RowSense::Ge => ">=",
            };
            writeln!(w, " r{}:{} {} {}", r, line, op, self.rhs[r])?;
        }
        writeln!(w, "Bounds")?;
        for j in 0..self.num_cols() {
            let (lo, up) = (self.col_lower[j], self.col_upper[j]);
            match (lo.is_finite(), up.is_finite()) {
                (false, false) => writeln!(w, " x{} free", j)?,
                (true, true) => writeln!(w, " {} <= x{} <= {}", lo, j, up)?,
                (true, false) => writeln!(w, " x{} >= {}", j, lo)?,
                (false, true) => writeln!(w, " -inf <= x{} <= {}", j, up)?,
            }
        }
        writeln!(w, "End")
    }
}

/// Symmetric with nonnegative diagonal and weak diagonal dominance; a
/// sufficient condition for positive semidefiniteness that covers the
/// diagonal-plus-sparse terms used here.
fn certified_psd(q: &SparseMatrix) -> bool {
    if !q.is_symmetric(1e-12) {
        return false;
    }
    let mut diag = vec![0.0; q.rows];
    let mut off = vec![0.0; q.rows];
    for &(r, c, v) in &q.entries {
        if r == c {
            diag[r] += v;
        } else {
            off[r] += v.abs();
        }
    }
    diag.iter()
        .zip(&off)
        .all(|(d, o)| *d >= 0.0 && *d + 1e-12 >= *o)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// One multiplier per row, `d obj / d rhs`. Empty unless optimal.
    pub duals: Vec<f64>,
    pub solve_time_s: f64,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tolerance: f64,
    /// Tolerance used when retrying after a numerical failure.
    pub relaxed_tolerance: f64,
    pub time_limit_s: Option<f64>,
    /// When set, every program is written to this directory before solving.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            relaxed_tolerance: 1e-6,
            time_limit_s: None,
            dump_dir: None,
        }
    }
}

pub trait LpBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, lp: &LinearProgram, opts: &SolverOptions) -> Result<SolveOutcome, BackendError>;
}

/// Returns the backend named by [`BACKEND_ENV`], defaulting to HiGHS.
pub fn backend_from_env() -> Result<Box<dyn LpBackend>, BackendError> {
    match std::env::var(BACKEND_ENV) {
        Ok(name) => backend_by_name(&name),
        Err(_) => Ok(Box::new(HighsBackend)),
    }
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn LpBackend>, BackendError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "" | "highs" => Ok(Box::new(HighsBackend)),
        "clarabel" => Ok(Box::new(ClarabelBackend)),
        other => Err(BackendError::UnknownBackend(other.to_string())),
    }
}

/// HiGHS dual simplex for LPs, giving vertex solutions and exact duals.
/// Programs with a quadratic term go to Clarabel: the HiGHS active-set QP
/// solver stalls on the badly scaled projection problems met here.
/// Single-threaded and with a fixed seed so results are reproducible.
#[derive(Debug, Default, Clone, Copy)]
pub struct HighsBackend;

impl HighsBackend {
    fn run(lp: &LinearProgram, tolerance: f64, presolve: bool, opts: &SolverOptions) -> Result<SolveOutcome, BackendError> {
        let started = Instant::now();
        let mut problem = ColProblem::new();
        let rows: Vec<Row> = lp
            .senses
            .iter()
            .zip(&lp.rhs)
            .map(|(sense, &b)| match sense {
                RowSense::Le => problem.add_row(f64::NEG_INFINITY..=b),
                RowSense::Eq => problem.add_row(b..=b),
                RowSense::Ge => problem.add_row(b..=f64::INFINITY),
            })
            .collect();
        for (j, col) in lp.matrix.columns().into_iter().enumerate() {
            let factors: Vec<(Row, f64)> = col.into_iter().map(|(r, v)| (rows[r], v)).collect();
            problem.add_column(lp.objective[j], lp.col_lower[j]..=lp.col_upper[j], factors);
        }
        let mut model = Model::try_new(problem)
            .map_err(|s| BackendError::Rejected(format!("load failed: {s:?}")))?;
        model.set_sense(Sense::Minimise);
        model.set_option("output_flag", false);
        model.set_option("threads", 1);
        model.set_option("parallel", "off");
        model.set_option("random_seed", 0);
        model.set_option("presolve", if presolve { "on" } else { "off" });
        model.set_option("primal_feasibility_tolerance", tolerance);
        model.set_option("dual_feasibility_tolerance", tolerance);
        if let Some(t) = opts.time_limit_s {
            model.set_option("time_limit", t);
        }
        model.set_option("solver", "simplex");
        let solved = match model.try_solve() {
            Ok(s) => s,
            Err(_) => {
                return Ok(SolveOutcome {
                    status: SolveStatus::NumericalFailure,
                    objective: f64::NAN,
                    primal: Vec::new(),
                    duals: Vec::new(),
                    solve_time_s: started.elapsed().as_secs_f64(),
                })
            }
        };
        let status = match solved.status() {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::Unbounded => SolveStatus::Unbounded,
            HighsModelStatus::UnboundedOrInfeasible if presolve => {
                // presolve cannot tell the two apart; the simplex can
                return Self::run(lp, tolerance, false, opts);
            }
            HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Infeasible,
            _ => SolveStatus::NumericalFailure,
        };
        let (objective, primal, duals) = if status == SolveStatus::Optimal {
            let sol = solved.get_solution();
            let primal = if lp.num_cols() == 0 { Vec::new() } else { sol.columns().to_vec() };
            let duals = if lp.num_rows() == 0 { Vec::new() } else { sol.dual_rows().to_vec() };
            let objective = if lp.num_cols() == 0 {
                lp.objective_offset
            } else {
                solved.objective_value() + lp.objective_offset
            };
            (objective, primal, duals)
        } else {
            (f64::NAN, Vec::new(), Vec::new())
        };
        Ok(SolveOutcome {
            status,
            objective,
            primal,
            duals,
            solve_time_s: started.elapsed().as_secs_f64(),
        })
    }
}

impl LpBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, lp: &LinearProgram, opts: &SolverOptions) -> Result<SolveOutcome, BackendError> {
        lp.check()?;
        if let Some(dir) = &opts.dump_dir {
            dump(lp, dir)?;
        }
        if lp.quadratic.as_ref().is_some_and(|q| q.nnz() > 0) {
            return ClarabelBackend::solve_with_retry(lp, opts);
        }
        let mut out = Self::run(lp, opts.tolerance, true, opts)?;
        if matches!(out.status, SolveStatus::Unbounded | SolveStatus::Infeasible) {
            // presolve occasionally misreports badly scaled programs; confirm without it
            let spent = out.solve_time_s;
            let again = Self::run(lp, opts.tolerance, false, opts)?;
            if again.status != out.status {
                log::warn!("presolve reported {:?}, plain simplex {:?}", out.status, again.status);
                out = again;
            }
            out.solve_time_s += spent;
        }
        let retries = [(opts.tolerance, false), (opts.relaxed_tolerance, true), (opts.relaxed_tolerance, false)];
        for (tolerance, presolve) in retries {
            if out.status != SolveStatus::NumericalFailure {
                break;
            }
            log::warn!("solve failed; retrying with tolerance {tolerance:e}, presolve {presolve}");
            let spent = out.solve_time_s;
            out = Self::run(lp, tolerance, presolve, opts)?;
            out.solve_time_s += spent;
        }
        if out.status == SolveStatus::NumericalFailure {
            log::warn!("simplex failed; falling back to the interior-point solver");
            let spent = out.solve_time_s;
            out = ClarabelBackend::run(lp, opts.tolerance, opts)?;
            out.solve_time_s += spent;
        }
        Ok(out)
    }
}

/// Clarabel interior-point solver for every program. LP duals come from the
/// interior solution, so they need not be vertex duals.
#[derive(Debug, Default, Clone, Copy)]
pub struct ClarabelBackend;

impl ClarabelBackend {
    /// One retry at the relaxed tolerance after a numerical failure.
    fn solve_with_retry(lp: &LinearProgram, opts: &SolverOptions) -> Result<SolveOutcome, BackendError> {
        let mut out = Self::run(lp, opts.tolerance, opts)?;
        if out.status == SolveStatus::NumericalFailure {
            log::warn!("interior-point solve failed; retrying with tolerance {:e}", opts.relaxed_tolerance);
            let spent = out.solve_time_s;
            out = Self::run(lp, opts.relaxed_tolerance, opts)?;
            out.solve_time_s += spent;
        }
        Ok(out)
    }

    fn run(lp: &LinearProgram, tolerance: f64, opts: &SolverOptions) -> Result<SolveOutcome, BackendError> {
        use clarabel::algebra::CscMatrix;
        use clarabel::solver::{
            DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
        };

        let started = Instant::now();
        let n = lp.num_cols();
        let row_lists = lp.matrix.row_lists();
        // solve for x = d * u with u of order one; the interior-point method
        // misjudges feasibility when epigraph columns are 1e6 times larger
        // than the capacities next to them
        let d = column_scales(lp, &row_lists);
        let row_lists: Vec<Vec<(usize, f64)>> = row_lists
            .into_iter()
            .map(|row| row.into_iter().map(|(c, v)| (c, v * d[c])).collect())
            .collect();
        // rows ordered: equalities, then `<=` rows (original `>=` rows negated), then bounds
        let mut rows_i = Vec::new();
        let mut rows_j = Vec::new();
        let mut vals = Vec::new();
        let mut b = Vec::new();
        let mut origin = Vec::new();
        // each row is normalised to unit max coefficient; `sign` carries the scale
        let mut push_row = |entries: &[(usize, f64)], sign: f64, rhs: f64, b: &mut Vec<f64>| -> f64 {
            let r = b.len();
            let norm = entries.iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
            let sign = if norm > 0.0 { sign / norm } else { sign };
            for &(c, v) in entries {
                rows_i.push(r);
                rows_j.push(c);
                vals.push(sign * v);
            }
            b.push(sign * rhs);
            sign
        };
        for (r, sense) in lp.senses.iter().enumerate() {
            if *sense == RowSense::Eq {
                let sign = push_row(&row_lists[r], 1.0, lp.rhs[r], &mut b);
                origin.push((r, sign));
            }
        }
        let n_eq = b.len();
        for (r, sense) in lp.senses.iter().enumerate() {
            let sign = match sense {
                RowSense::Le => 1.0,
                RowSense::Ge => -1.0,
                RowSense::Eq => continue,
            };
            let sign = push_row(&row_lists[r], sign, lp.rhs[r], &mut b);
            origin.push((r, sign));
        }
        for j in 0..n {
            if lp.col_upper[j].is_finite() {
                push_row(&[(j, 1.0)], 1.0, lp.col_upper[j] / d[j], &mut b);
            }
            if lp.col_lower[j].is_finite() {
                push_row(&[(j, 1.0)], -1.0, lp.col_lower[j] / d[j], &mut b);
            }
        }
        let m = b.len();
        let a = CscMatrix::new_from_triplets(m, n, rows_i, rows_j, vals);
        let (mut pi, mut pj, mut pv) = (Vec::new(), Vec::new(), Vec::new());
        if let Some(q) = &lp.quadratic {
            let mut upper = std::collections::BTreeMap::<(usize, usize), f64>::new();
            for &(r, c, v) in &q.entries {
                if r <= c {
                    *upper.entry((r, c)).or_insert(0.0) += v * d[r] * d[c];
                }
            }
            for ((r, c), v) in upper {
                pi.push(r);
                pj.push(c);
                pv.push(v);
            }
        }
        let p = CscMatrix::new_from_triplets(n, n, pi, pj, pv);
        let cones = [
            SupportedConeT::ZeroConeT(n_eq),
            SupportedConeT::NonnegativeConeT(m - n_eq),
        ];
        let mut builder = DefaultSettingsBuilder::default();
        builder
            .verbose(false)
            .max_threads(1)
            .tol_feas(tolerance)
            .tol_gap_abs(tolerance)
            .tol_gap_rel(tolerance);
        if let Some(t) = opts.time_limit_s {
            builder.time_limit(t);
        }
        let settings = builder
            .build()
            .map_err(|e| BackendError::Rejected(format!("settings: {e}")))?;
        let q: Vec<f64> = lp.objective.iter().zip(&d).map(|(c, s)| c * s).collect();
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| BackendError::Rejected(format!("load failed: {e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
            _ => SolveStatus::NumericalFailure,
        };
        if status != SolveStatus::Optimal {
            return Ok(SolveOutcome {
                status,
                objective: f64::NAN,
                primal: Vec::new(),
                duals: Vec::new(),
                solve_time_s: started.elapsed().as_secs_f64(),
            });
        }
        // KKT: P x + q + A^T z = 0, so d obj / d b = -z on the transformed rows
        let mut duals = vec![0.0; lp.num_rows()];
        for (k, &(r, sign)) in origin.iter().enumerate() {
            duals[r] = -sign * sol.z[k];
        }
        let primal: Vec<f64> = sol.x.iter().zip(&d).map(|(u, s)| u * s).collect();
        Ok(SolveOutcome {
            status,
            objective: lp.objective_value(&primal),
            primal,
            duals,
            solve_time_s: started.elapsed().as_secs_f64(),
        })
    }
}

/// Rough magnitude of each column: its bounds when both are finite,
/// otherwise the largest `|rhs / a|` over rows where it has a significant
/// coefficient. Clamped to `[1, 1e10]`.
fn column_scales(lp: &LinearProgram, rows: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = lp.num_cols();
    let mut d = vec![1.0f64; n];
    let boxed = |j: usize| lp.col_lower[j].is_finite() && lp.col_upper[j].is_finite();
    for j in (0..n).filter(|&j| boxed(j)) {
        d[j] = d[j].max(lp.col_lower[j].abs()).max(lp.col_upper[j].abs());
    }
    for (r, row) in rows.iter().enumerate() {
        let big = row.iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
        let rhs = lp.rhs[r].abs();
        if !rhs.is_finite() {
            continue;
        }
        for &(c, v) in row {
            if !boxed(c) && v.abs() >= 1e-3 * big {
                d[c] = d[c].max(rhs / v.abs());
            }
        }
    }
    d.iter().map(|v| v.clamp(1.0, 1e10)).collect()
}

impl LpBackend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, lp: &LinearProgram, opts: &SolverOptions) -> Result<SolveOutcome, BackendError> {
        lp.check()?;
        if let Some(dir) = &opts.dump_dir {
            dump(lp, dir)?;
        }
        Self::solve_with_retry(lp, opts)
    }
}

fn dump(lp: &LinearProgram, dir: &Path) -> Result<(), BackendError> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    std::fs::create_dir_all(dir)?;
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    let file = std::fs::File::create(dir.join(format!("program_{k:06}.lp")))?;
    lp.write_lp(std::io::BufWriter::new(file))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LinearProgram) -> SolveOutcome {
        HighsBackend.solve(lp, &SolverOptions::default()).unwrap()
    }

    #[test]
    fn lower_bounded_variable_has_positive_dual() {
        // min x s.t. x >= 3
        let mut lp = LinearProgram::new();
        let x = lp.add_col(1.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row([(x, 1.0)], RowSense::Ge, 3.0);
        let out = solve(&lp);
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective - 3.0).abs() < 1e-9);
        // raising the rhs by one raises the optimum by one
        assert!((out.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn binding_le_row_has_nonpositive_dual() {
        // min -x s.t. x <= 2
        let mut lp = LinearProgram::new();
        let x = lp.add_col(-1.0, 0.0, f64::INFINITY);
        lp.add_row([(x, 1.0)], RowSense::Le, 2.0);
        let out = solve(&lp);
        assert!((out.objective + 2.0).abs() < 1e-9);
        assert!((out.duals[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_variable_with_negative_cost_is_unbounded() {
        let mut lp = LinearProgram::new();
        lp.add_col(-1.0, f64::NEG_INFINITY, f64::INFINITY);
        assert_eq!(solve(&lp).status, SolveStatus::Unbounded);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_col(1.0, 0.0, 1.0);
        lp.add_row([(x, 1.0)], RowSense::Ge, 2.0);
        assert_eq!(solve(&lp).status, SolveStatus::Infeasible);
    }

    #[test]
    fn projection_qp_matches_kkt() {
        // min |x - (1,1)|^2 s.t. x1 + x2 <= 1  ->  x = (0.5, 0.5)
        let mut lp = LinearProgram::new();
        let a = lp.add_col(-2.0, f64::NEG_INFINITY, f64::INFINITY);
        let b = lp.add_col(-2.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.objective_offset = 2.0;
        lp.add_row([(a, 1.0), (b, 1.0)], RowSense::Le, 1.0);
        let mut q = SparseMatrix::new(2, 2);
        q.push(0, 0, 2.0);
        q.push(1, 1, 2.0);
        lp.quadratic = Some(q);
        let out = solve(&lp);
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.primal[0] - 0.5).abs() < 1e-6);
        assert!((out.primal[1] - 0.5).abs() < 1e-6);
        assert!((out.objective - 0.5).abs() < 1e-6);
    }

    #[test]
    fn interior_point_backend_uses_the_same_dual_signs() {
        let mut lp = LinearProgram::new();
        let x = lp.add_col(2.0, 0.0, f64::INFINITY);
        let y = lp.add_col(-1.0, 0.0, f64::INFINITY);
        lp.add_row([(x, 1.0)], RowSense::Ge, 3.0);
        lp.add_row([(y, 1.0)], RowSense::Le, 5.0);
        lp.add_row([(x, 1.0), (y, -1.0)], RowSense::Eq, 1.0);
        let exact = solve(&lp);
        let ipm = ClarabelBackend.solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(ipm.status, SolveStatus::Optimal);
        assert!((exact.objective - ipm.objective).abs() < 1e-6);
        for (a, b) in exact.duals.iter().zip(&ipm.duals) {
            assert!((a - b).abs() < 1e-6, "{:?} vs {:?}", exact.duals, ipm.duals);
        }
        let mut bad = LinearProgram::new();
        let z = bad.add_col(1.0, 0.0, 1.0);
        bad.add_row([(z, 1.0)], RowSense::Ge, 2.0);
        assert_eq!(ClarabelBackend.solve(&bad, &SolverOptions::default()).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn indefinite_quadratic_is_rejected() {
        let mut lp = LinearProgram::new();
        lp.add_col(0.0, 0.0, 1.0);
        let mut q = SparseMatrix::new(1, 1);
        q.push(0, 0, -1.0);
        lp.quadratic = Some(q);
        assert!(matches!(HighsBackend.solve(&lp, &SolverOptions::default()), Err(BackendError::Malformed(_))));
    }

    #[test]
    fn unknown_backend_name_is_an_error() {
        assert!(backend_by_name("gurobi").is_err());
        assert_eq!(backend_by_name("HiGHS").unwrap().name(), "highs");
        assert_eq!(backend_by_name("clarabel").unwrap().name(), "clarabel");
    }

    #[test]
    fn lp_text_dump_mentions_every_row() {
        let mut lp = LinearProgram::new();
        let x = lp.add_col(1.0, 0.0, f64::INFINITY);
        lp.add_row([(x, 2.0)], RowSense::Ge, 1.0);
        lp.add_row([(x, 1.0)], RowSense::Le, 5.0);
        let mut buf = Vec::new();
        lp.write_lp(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("r0: +2 x0 >= 1"));
        assert!(text.contains("r1: +1 x0 <= 5"));
        assert!(text.contains("x0 >= 0"));
    }
}
