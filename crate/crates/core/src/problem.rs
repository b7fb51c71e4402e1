//! In-memory model of block-structured problems
//!
//! ```text
//! min_{x in X} f(x) + sum_i pi_i g(x_i, c_i)
//! g(x_i, c_i) = min_y { c_i^T C y : A y (<=|=) B x_i, y in bounds }
//! ```
//!
//! where every node shares `A`, `B` and `C` and `x_i = S_i x` is a linear
//! image of the master vector.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, RowSense};
use crate::sparse::{dot, SparseMatrix};

/// Default cap on the nonzeros of the monolithic program.
pub const DEFAULT_MONOLITHIC_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemTemplate {
    /// Constraint rows x operational variables.
    pub a: SparseMatrix,
    /// Constraint rows x node-view components.
    pub b: SparseMatrix,
    /// Cost components x operational variables; `phi = C y`.
    pub cost_map: SparseMatrix,
    pub senses: Vec<RowSense>,
    pub y_lower: Vec<f64>,
    pub y_upper: Vec<f64>,
}

impl SubproblemTemplate {
    pub fn y_dim(&self) -> usize {
        self.a.cols
    }

    pub fn con_dim(&self) -> usize {
        self.a.rows
    }

    pub fn x_dim(&self) -> usize {
        self.b.cols
    }

    pub fn cost_dim(&self) -> usize {
        self.cost_map.rows
    }

    /// Objective vector over `y` for cost weights `c`: `C^T c`.
    pub fn objective(&self, c: &[f64]) -> Vec<f64> {
        self.cost_map.transpose_mul_vec(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionNode {
    pub id: usize,
    pub pi: f64,
    pub cost: Vec<f64>,
    /// Maps the master vector to this node's right-hand-side vector.
    pub selector: SparseMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterBlock {
    pub objective: Vec<f64>,
    pub constraints: SparseMatrix,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub x_lower: Vec<f64>,
    pub x_upper: Vec<f64>,
    #[serde(default)]
    pub names: Vec<String>,
}

impl MasterBlock {
    pub fn x_dim(&self) -> usize {
        self.objective.len()
    }

    pub fn cost(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Adds the master columns and constraint rows to `lp`, returning the
    /// index of the first master column.
    pub(crate) fn append_to(&self, lp: &mut LinearProgram) -> usize {
        let first = lp.num_cols();
        for j in 0..self.x_dim() {
            lp.add_col(self.objective[j], self.x_lower[j], self.x_upper[j]);
        }
        for (r, row) in self.constraints.row_lists().into_iter().enumerate() {
            lp.add_row(
                row.into_iter().map(|(c, v)| (first + c, v)),
                self.senses[r],
                self.rhs[r],
            );
        }
        first
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredProblem {
    pub master: MasterBlock,
    pub template: SubproblemTemplate,
    pub nodes: Vec<DecisionNode>,
}

impl StructuredProblem {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn node_view(&self, x: &[f64], node: usize) -> Result<Vec<f64>> {
        node_view(x, &self.nodes[node])
    }

    /// `f(x) + sum_i pi_i values[i]`.
    pub fn total_cost(&self, x: &[f64], values: &[f64]) -> f64 {
        self.master.cost(x)
            + self
                .nodes
                .iter()
                .zip(values)
                .map(|(n, v)| n.pi * v)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    Dimension { what: String, expected: usize, found: usize },
    NonPositiveProbability { node: usize, pi: f64 },
    NegativeCost { node: usize, component: usize, value: f64 },
    NodeIds { position: usize, id: usize },
    UnboundedMaster { column: usize },
    EmptyBox { what: &'static str, index: usize },
    NonFinite { what: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Dimension { what, expected, found } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, found {found}")
            }
            ValidationIssue::NonPositiveProbability { node, pi } => {
                write!(f, "node {node} has non-positive probability {pi}")
            }
            ValidationIssue::NegativeCost { node, component, value } => {
                write!(f, "node {node} cost component {component} is negative ({value})")
            }
            ValidationIssue::NodeIds { position, id } => {
                write!(f, "node at position {position} has id {id}; ids must be 0..n in order")
            }
            ValidationIssue::UnboundedMaster { column } => {
                write!(f, "master column {column} has an infinite bound")
            }
            ValidationIssue::EmptyBox { what, index } => {
                write!(f, "{what} {index} has lower bound above upper bound")
            }
            ValidationIssue::NonFinite { what } => write!(f, "non-finite value in {what}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    fn dim(&mut self, what: impl Into<String>, expected: usize, found: usize) {
        if expected != found {
            self.issues.push(ValidationIssue::Dimension {
                what: what.into(),
                expected,
                found,
            });
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

pub fn validate(problem: &StructuredProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let t = &problem.template;
    let m = &problem.master;

    report.dim("template B rows", t.a.rows, t.b.rows);
    report.dim("template cost map columns", t.a.cols, t.cost_map.cols);
    report.dim("template senses", t.a.rows, t.senses.len());
    report.dim("template y lower bounds", t.a.cols, t.y_lower.len());
    report.dim("template y upper bounds", t.a.cols, t.y_upper.len());
    for (i, (lo, up)) in t.y_lower.iter().zip(&t.y_upper).enumerate() {
        if lo > up {
            report.issues.push(ValidationIssue::EmptyBox { what: "y bound", index: i });
        }
    }
    for (name, mat) in [("A", &t.a), ("B", &t.b), ("C", &t.cost_map), ("master constraints", &m.constraints)] {
        if mat.entries.iter().any(|e| !e.2.is_finite() || e.0 >= mat.rows || e.1 >= mat.cols) {
            report.issues.push(ValidationIssue::NonFinite { what: format!("matrix {name}") });
        }
    }

    let n = m.x_dim();
    report.dim("master constraint columns", n, m.constraints.cols);
    report.dim("master senses", m.constraints.rows, m.senses.len());
    report.dim("master rhs", m.constraints.rows, m.rhs.len());
    report.dim("master lower bounds", n, m.x_lower.len());
    report.dim("master upper bounds", n, m.x_upper.len());
    for j in 0..n.min(m.x_lower.len()).min(m.x_upper.len()) {
        if !m.x_lower[j].is_finite() || !m.x_upper[j].is_finite() {
            report.issues.push(ValidationIssue::UnboundedMaster { column: j });
        } else if m.x_lower[j] > m.x_upper[j] {
            report.issues.push(ValidationIssue::EmptyBox { what: "master column", index: j });
        }
    }

    for (pos, node) in problem.nodes.iter().enumerate() {
        if node.id != pos {
            report.issues.push(ValidationIssue::NodeIds { position: pos, id: node.id });
        }
        if !(node.pi > 0.0) || !node.pi.is_finite() {
            report.issues.push(ValidationIssue::NonPositiveProbability { node: node.id, pi: node.pi });
        }
        report.dim(format!("node {} cost vector", node.id), t.cost_dim(), node.cost.len());
        report.dim(format!("node {} selector output", node.id), t.x_dim(), node.selector.rows);
        report.dim(format!("node {} selector input", node.id), n, node.selector.cols);
        for (k, &c) in node.cost.iter().enumerate() {
            if c < 0.0 || !c.is_finite() {
                report.issues.push(ValidationIssue::NegativeCost { node: node.id, component: k, value: c });
            }
        }
    }
    report
}

pub fn node_view(x: &[f64], node: &DecisionNode) -> Result<Vec<f64>> {
    if x.len() != node.selector.cols {
        return Err(Error::Dimension {
            what: "master vector",
            expected: node.selector.cols,
            found: x.len(),
        });
    }
    Ok(node.selector.mul_vec(x))
}

/// The undecomposed program together with its column layout.
#[derive(Debug, Clone)]
pub struct MonolithicProgram {
    pub lp: LinearProgram,
    pub x_dim: usize,
    pub y_dim: usize,
    pub nodes: usize,
}

impl MonolithicProgram {
    pub fn master_part<'a>(&self, primal: &'a [f64]) -> &'a [f64] {
        &primal[..self.x_dim]
    }

    pub fn node_part<'a>(&self, primal: &'a [f64], node: usize) -> &'a [f64] {
        let start = self.x_dim + node * self.y_dim;
        &primal[start..start + self.y_dim]
    }
}

/// Builds the single LP over `(x, y_0, ..., y_{n-1})`. Intended as a
/// verification oracle on desk-scale instances.
pub fn assemble_monolithic(problem: &StructuredProblem, cap: usize) -> Result<MonolithicProgram> {
    problem.ensure_valid()?;
    let t = &problem.template;
    let m = &problem.master;
    let x_dim = m.x_dim();
    let y_dim = t.y_dim();

    let b_rows = t.b.row_lists();
    let per_node: usize = problem
        .nodes
        .iter()
        .map(|n| t.a.nnz() + t.b.nnz() * n.selector.nnz().max(1))
        .sum();
    let estimate = m.constraints.nnz() + per_node;
    if estimate > cap {
        return Err(Error::TooLarge { nonzeros: estimate, cap });
    }

    let mut lp = LinearProgram::new();
    m.append_to(&mut lp);
    let a_rows = t.a.row_lists();
    for node in &problem.nodes {
        let first = lp.num_cols();
        let obj = t.objective(&node.cost);
        for j in 0..y_dim {
            lp.add_col(node.pi * obj[j], t.y_lower[j], t.y_upper[j]);
        }
        // B S_i as a dense-by-row map from node components to master columns
        let sel_rows = node.selector.row_lists();
        for r in 0..t.con_dim() {
            let mut entries: Vec<(usize, f64)> =
                a_rows[r].iter().map(|&(c, v)| (first + c, v)).collect();
            let mut xs = std::collections::BTreeMap::<usize, f64>::new();
            for &(k, bv) in &b_rows[r] {
                for &(j, sv) in &sel_rows[k] {
                    *xs.entry(j).or_insert(0.0) -= bv * sv;
                }
            }
            entries.extend(xs.into_iter().filter(|(_, v)| *v != 0.0));
            lp.add_row(entries, t.senses[r], 0.0);
        }
    }
    if lp.matrix.nnz() > cap {
        return Err(Error::TooLarge { nonzeros: lp.matrix.nnz(), cap });
    }
    Ok(MonolithicProgram {
        lp,
        x_dim,
        y_dim,
        nodes: problem.node_count(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Two-node toy: x in [0, 4]^2, node i buys y to cover demand d_i with
    /// capacity x_i at cost 1 or shed at cost 10.
    pub(crate) fn toy(nodes: usize) -> StructuredProblem {
        // y = (gen, shed); rows: gen <= x_cap ; -gen - shed <= -demand
        // node view = (cap, -demand)
        let mut a = SparseMatrix::new(2, 2);
        a.push(0, 0, 1.0);
        a.push(1, 0, -1.0);
        a.push(1, 1, -1.0);
        let mut b = SparseMatrix::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(1, 1, 1.0);
        let mut cost_map = SparseMatrix::new(2, 2);
        cost_map.push(0, 0, 1.0);
        cost_map.push(1, 1, 1.0);
        let template = SubproblemTemplate {
            a,
            b,
            cost_map,
            senses: vec![RowSense::Le, RowSense::Le],
            y_lower: vec![0.0; 2],
            y_upper: vec![f64::INFINITY; 2],
        };
        // master: x_cap per node plus fixed negated demand per node
        let x_dim = 2 * nodes;
        let mut objective = vec![0.0; x_dim];
        let mut x_lower = vec![0.0; x_dim];
        let mut x_upper = vec![4.0; x_dim];
        let mut out_nodes = Vec::new();
        for i in 0..nodes {
            objective[2 * i] = 2.0 + i as f64 * 0.5;
            let demand = 2.0 + i as f64;
            x_lower[2 * i + 1] = -demand;
            x_upper[2 * i + 1] = -demand;
            out_nodes.push(DecisionNode {
                id: i,
                pi: 1.0 / nodes as f64,
                cost: vec![1.0 + 0.5 * i as f64, 10.0],
                selector: SparseMatrix::selection(&[2 * i, 2 * i + 1], x_dim),
            });
        }
        StructuredProblem {
            master: MasterBlock {
                objective,
                constraints: SparseMatrix::new(0, x_dim),
                senses: vec![],
                rhs: vec![],
                x_lower,
                x_upper,
                names: vec![],
            },
            template,
            nodes: out_nodes,
        }
    }

    #[test]
    fn well_formed_problem_has_empty_report() {
        assert!(validate(&toy(2)).is_empty());
    }

    #[test]
    fn zero_probability_is_flagged() {
        let mut p = toy(2);
        p.nodes[1].pi = 0.0;
        let report = validate(&p);
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::NonPositiveProbability { node: 1, .. })));
    }

    #[test]
    fn selector_with_missing_column_is_flagged() {
        let mut p = toy(2);
        p.nodes[0].selector = SparseMatrix::selection(&[0], 4);
        let report = validate(&p);
        assert_eq!(report.issues.len(), 1);
        assert!(matches!(
            &report.issues[0],
            ValidationIssue::Dimension { expected: 2, found: 1, .. }
        ));
    }

    #[test]
    fn shuffled_ids_are_flagged() {
        let mut p = toy(2);
        p.nodes.swap(0, 1);
        assert_eq!(validate(&p).issues.len(), 2);
    }

    #[test]
    fn node_view_projects_and_checks_dimension() {
        let id = DecisionNode {
            id: 0,
            pi: 1.0,
            cost: vec![],
            selector: SparseMatrix::identity(3),
        };
        assert_eq!(node_view(&[1.0, 2.0, 3.0], &id).unwrap(), vec![1.0, 2.0, 3.0]);
        let pick = DecisionNode {
            selector: SparseMatrix::selection(&[0, 2], 3),
            ..id
        };
        assert_eq!(node_view(&[1.0, 2.0, 3.0], &pick).unwrap(), vec![1.0, 3.0]);
        assert!(node_view(&[1.0, 2.0], &pick).is_err());
    }

    #[test]
    fn monolithic_dimensions() {
        let p = toy(1);
        let mono = assemble_monolithic(&p, DEFAULT_MONOLITHIC_CAP).unwrap();
        assert_eq!(mono.lp.num_cols(), p.master.x_dim() + 2);
        assert_eq!(mono.lp.num_rows(), p.master.constraints.rows + 2);

        let p3 = toy(3);
        let mono = assemble_monolithic(&p3, DEFAULT_MONOLITHIC_CAP).unwrap();
        assert_eq!(mono.lp.num_cols(), p3.master.x_dim() + 3 * 2);
    }

    #[test]
    fn monolithic_respects_cap() {
        assert!(matches!(
            assemble_monolithic(&toy(3), 5),
            Err(Error::TooLarge { .. })
        ));
    }
}
