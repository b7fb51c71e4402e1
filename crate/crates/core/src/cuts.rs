use serde::{Deserialize, Serialize};

use crate::problem::StructuredProblem;
use crate::sparse::dot;

/// Epigraph cut `beta_i >= theta + lam^T (x_i - anchor)` in node space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub anchor: Vec<f64>,
    pub theta: f64,
    pub lam: Vec<f64>,
}

impl Cut {
    pub fn value_at(&self, x_i: &[f64]) -> f64 {
        self.theta
            + self
                .lam
                .iter()
                .zip(x_i.iter().zip(&self.anchor))
                .map(|(l, (x, a))| l * (x - a))
                .sum::<f64>()
    }

    fn same_as(&self, other: &Cut, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        close(self.theta, other.theta)
            && self.anchor.iter().zip(&other.anchor).all(|(a, b)| close(*a, *b))
            && self.lam.iter().zip(&other.lam).all(|(a, b)| close(*a, *b))
    }
}

/// Cut expressed over master columns: `beta_i - sum coeffs * x >= constant`.
#[derive(Debug, Clone)]
pub(crate) struct MasterRow {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

/// Per-node cut lists. Pools only grow.
#[derive(Debug, Clone)]
pub struct CutPool {
    floor: f64,
    cuts: Vec<Vec<Cut>>,
    rows: Vec<Vec<MasterRow>>,
}

const DUPLICATE_TOL: f64 = 1e-10;

impl CutPool {
    pub fn new(nodes: usize, floor: f64) -> Self {
        Self {
            floor,
            cuts: vec![Vec::new(); nodes],
            rows: vec![Vec::new(); nodes],
        }
    }

    /// Lower bound `beta_i >= floor` shared by every node.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn nodes(&self) -> usize {
        self.cuts.len()
    }

    pub fn cuts(&self, node: usize) -> &[Cut] {
        &self.cuts[node]
    }

    pub fn len(&self) -> usize {
        self.cuts.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn master_rows(&self, node: usize) -> &[MasterRow] {
        &self.rows[node]
    }

    /// Adds a cut unless an identical one is already stored. Returns whether
    /// the pool changed.
    pub fn add(&mut self, problem: &StructuredProblem, node: usize, cut: Cut) -> bool {
        if self.cuts[node].iter().any(|c| c.same_as(&cut, DUPLICATE_TOL)) {
            return false;
        }
        let selector = &problem.nodes[node].selector;
        let mut dense = std::collections::BTreeMap::<usize, f64>::new();
        for &(r, c, v) in &selector.entries {
            let l = cut.lam[r];
            if l != 0.0 {
                *dense.entry(c).or_insert(0.0) += l * v;
            }
        }
        let row = MasterRow {
            coeffs: dense.into_iter().filter(|(_, v)| *v != 0.0).collect(),
            constant: cut.theta - dot(&cut.lam, &cut.anchor),
        };
        self.rows[node].push(row);
        self.cuts[node].push(cut);
        true
    }

    /// Largest cut value (or the floor) at `x_i`: the current model of node `node`.
    pub fn model_value(&self, node: usize, x_i: &[f64]) -> f64 {
        self.cuts[node]
            .iter()
            .map(|c| c.value_at(x_i))
            .fold(self.floor, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::tests::toy;

    #[test]
    fn duplicates_are_skipped_and_pool_grows() {
        let p = toy(2);
        let mut pool = CutPool::new(2, 0.0);
        let cut = Cut {
            anchor: vec![1.0, -2.0],
            theta: 3.0,
            lam: vec![-1.0, -10.0],
        };
        assert!(pool.add(&p, 0, cut.clone()));
        assert!(!pool.add(&p, 0, cut.clone()));
        assert!(pool.add(&p, 1, cut));
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn model_value_respects_floor() {
        let p = toy(1);
        let mut pool = CutPool::new(1, 0.0);
        pool.add(
            &p,
            0,
            Cut {
                anchor: vec![0.0, 0.0],
                theta: 1.0,
                lam: vec![-1.0, 0.0],
            },
        );
        assert_eq!(pool.model_value(0, &[0.5, 0.0]), 0.5);
        assert_eq!(pool.model_value(0, &[3.0, 0.0]), 0.0);
    }
}
