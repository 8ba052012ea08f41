use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Compressed sparse row matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(n_cols: usize) -> Self {
        SparseMatrix { n_cols, indptr: vec![0], indices: Vec::new(), values: Vec::new() }
    }

    /// Appends a row given as `(column, value)` pairs; zeros are dropped.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (u32, f64)>) {
        for (c, v) in entries {
            debug_assert!((c as usize) < self.n_cols);
            if v != 0.0 {
                self.indices.push(c);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = SparseMatrix::new(n_cols);
        for r in rows {
            m.push_row(r.iter().enumerate().map(|(c, &v)| (c as u32, v)));
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum()
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        let (idx, val) = self.row(i);
        for (&c, &v) in idx.iter().zip(val) {
            out[c as usize] = v;
        }
        out
    }

    /// Squared Euclidean distance from row `i` to a dense point whose
    /// squared norm is `point_norm_sq`.
    pub fn dist_sq(&self, i: usize, point: &[f64], point_norm_sq: f64) -> f64 {
        let (idx, val) = self.row(i);
        let mut on_support = 0.0;
        let mut point_on_support = 0.0;
        for (&c, &v) in idx.iter().zip(val) {
            let p = point[c as usize];
            on_support += (v - p) * (v - p);
            point_on_support += p * p;
        }
        (on_support + (point_norm_sq - point_on_support)).max(0.0)
    }
}
