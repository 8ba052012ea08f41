use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sparse::SparseMatrix;
use super::ClusterError;
use crate::rng::{derive_seed, seeded, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub batch_size: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Independent k-means++ restarts; the lowest final inertia wins.
    pub n_init: usize,
    /// Convergence threshold on the largest centroid move.
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansParams { k, batch_size: 1024, max_iters: 100, seed, n_init: 3, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub n_cols: usize,
    /// `k × n_cols`, row-major.
    pub centroids: Vec<f64>,
    pub labels: Vec<u32>,
    pub inertia: f64,
    pub cluster_ratios: Vec<f64>,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.n_cols..(c + 1) * self.n_cols]
    }
}

/// Share of rows per cluster id.
pub fn cluster_ratios(labels: &[u32], k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let n = labels.len() as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

struct Centroids {
    n_cols: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl Centroids {
    fn get(&self, c: usize) -> &[f64] {
        &self.data[c * self.n_cols..(c + 1) * self.n_cols]
    }

    fn refresh_norm(&mut self, c: usize) {
        self.norms[c] = self.get(c).iter().map(|v| v * v).sum();
    }

    fn k(&self) -> usize {
        self.norms.len()
    }

    /// Nearest centroid (ties to the lowest id) and the squared distance.
    fn nearest(&self, m: &SparseMatrix, row: usize) -> (usize, f64) {
        let mut best = (0, m.dist_sq(row, self.get(0), self.norms[0]));
        for c in 1..self.k() {
            let d = m.dist_sq(row, self.get(c), self.norms[c]);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    }

    fn set_from_row(&mut self, c: usize, m: &SparseMatrix, row: usize) {
        let dense = m.dense_row(row);
        self.data[c * self.n_cols..(c + 1) * self.n_cols].copy_from_slice(&dense);
        self.refresh_norm(c);
    }
}

fn kmeans_plus_plus(m: &SparseMatrix, k: usize, rng: &mut SeededRng) -> Centroids {
    let n = m.n_rows();
    let mut cents = Centroids { n_cols: m.n_cols(), data: vec![0.0; k * m.n_cols()], norms: vec![0.0; k] };
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    cents.set_from_row(0, m, first);
    chosen[first] = true;
    let mut closest: Vec<f64> = (0..n).map(|i| m.dist_sq(i, cents.get(0), cents.norms[0])).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, d) in closest.iter().enumerate() {
                acc += d;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // every row coincides with a chosen centroid
            chosen.iter().position(|&x| !x).unwrap_or(0)
        };
        cents.set_from_row(c, m, pick);
        chosen[pick] = true;
        for (i, best) in closest.iter_mut().enumerate() {
            let d = m.dist_sq(i, cents.get(c), cents.norms[c]);
            if d < *best {
                *best = d;
            }
        }
    }
    cents
}

/// Moves centroids that own no row onto the row farthest from its own
/// centroid, one row per empty cluster.
fn reseed_empty(m: &SparseMatrix, cents: &mut Centroids) {
    let n = m.n_rows();
    let mut assign: Vec<(usize, f64)> = (0..n).map(|i| cents.nearest(m, i)).collect();
    let mut used = vec![false; n];
    for c in 0..cents.k() {
        if assign.iter().any(|&(a, _)| a == c) {
            continue;
        }
        let far = (0..n).filter(|&i| !used[i]).max_by(|&a, &b| assign[a].1.total_cmp(&assign[b].1).then(b.cmp(&a)));
        if let Some(row) = far {
            used[row] = true;
            cents.set_from_row(c, m, row);
            assign[row] = (c, 0.0);
        }
    }
}

fn run_once(m: &SparseMatrix, params: &KMeansParams, seed: u64) -> ClusterModel {
    let n = m.n_rows();
    let k = params.k;
    let mut rng = seeded(seed);
    let mut cents = kmeans_plus_plus(m, k, &mut rng);
    reseed_empty(m, &mut cents);

    let mut counts = vec![0u64; k];
    let mut sums = vec![0.0; k * m.n_cols()];
    let mut batch_counts = vec![0u64; k];
    let mut iterations = 0;
    for _ in 0..params.max_iters {
        iterations += 1;
        let batch: Vec<usize> = if params.batch_size >= n {
            (0..n).collect()
        } else {
            let mut b = index::sample(&mut rng, n, params.batch_size).into_vec();
            b.sort_unstable();
            b
        };
        sums.iter_mut().for_each(|s| *s = 0.0);
        batch_counts.iter_mut().for_each(|c| *c = 0);
        for &row in &batch {
            let (c, _) = cents.nearest(m, row);
            batch_counts[c] += 1;
            let (idx, val) = m.row(row);
            for (&j, &v) in idx.iter().zip(val) {
                sums[c * m.n_cols() + j as usize] += v;
            }
        }
        // Equivalent to per-sample steps with learning rate 1/count.
        let mut shift = 0.0f64;
        for c in 0..k {
            if batch_counts[c] == 0 {
                continue;
            }
            let old = counts[c] as f64;
            let new = (counts[c] + batch_counts[c]) as f64;
            let mut moved = 0.0;
            for j in 0..m.n_cols() {
                let slot = &mut cents.data[c * m.n_cols() + j];
                let updated = (*slot * old + sums[c * m.n_cols() + j]) / new;
                moved += (updated - *slot) * (updated - *slot);
                *slot = updated;
            }
            counts[c] += batch_counts[c];
            cents.refresh_norm(c);
            shift = shift.max(libm::sqrt(moved));
        }
        if shift < params.tol {
            break;
        }
    }

    let mut labels = Vec::with_capacity(n);
    let mut inertia = 0.0;
    for i in 0..n {
        let (c, d) = cents.nearest(m, i);
        labels.push(c as u32);
        inertia += d;
    }
    let cluster_ratios = cluster_ratios(&labels, k);
    ClusterModel { k, n_cols: m.n_cols(), centroids: cents.data, labels, inertia, cluster_ratios, iterations }
}

/// Mini-batch k-means with k-means++ seeding. Each restart draws from its
/// own seed derived from `params.seed`; the restart with the lowest inertia
/// is returned.
pub fn minibatch_kmeans(m: &SparseMatrix, params: &KMeansParams) -> Result<ClusterModel, ClusterError> {
    if params.k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if params.k > m.n_rows() {
        return Err(ClusterError::TooManyClusters { k: params.k, rows: m.n_rows() });
    }
    let mut best: Option<ClusterModel> = None;
    for run in 0..params.n_init.max(1) {
        let model = run_once(m, params, derive_seed(params.seed, run as u64));
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.unwrap())
}
