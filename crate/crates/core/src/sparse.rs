use serde::{Deserialize, Serialize};

/// Sparse matrix in coordinate (triplet) form.
///
/// Entries are kept in insertion order; duplicates are summed by consumers
/// that densify (`mul_vec`, `transpose_mul_vec`, `columns`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    /// Row-selection matrix: output row `k` picks input column `picks[k]`.
    pub fn selection(picks: &[usize], cols: usize) -> Self {
        Self {
            rows: picks.len(),
            cols,
            entries: picks.iter().enumerate().map(|(r, &c)| (r, c, 1.0)).collect(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        let mut out = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
        out
    }

    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "dimension mismatch in transpose_mul_vec");
        let mut out = vec![0.0; self.cols];
        for &(r, c, v) in &self.entries {
            out[c] += v * y[r];
        }
        out
    }

    /// Column-wise view: for every column the list of `(row, value)` pairs,
    /// rows in insertion order.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut counts = vec![0usize; self.cols];
        for &(_, c, _) in &self.entries {
            counts[c] += 1;
        }
        let mut out: Vec<Vec<(usize, f64)>> =
            counts.into_iter().map(Vec::with_capacity).collect();
        for &(r, c, v) in &self.entries {
            out[c].push((r, v));
        }
        out
    }

    /// Row-wise view, mirror of [`SparseMatrix::columns`].
    pub fn row_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.rows];
        for &(r, c, v) in &self.entries {
            out[r].push((c, v));
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let mut dense = std::collections::BTreeMap::new();
        for &(r, c, v) in &self.entries {
            *dense.entry((r, c)).or_insert(0.0) += v;
        }
        dense.iter().all(|(&(r, c), &v)| {
            let t = dense.get(&(c, r)).copied().unwrap_or(0.0);
            (v - t).abs() <= tol * (1.0 + v.abs())
        })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
