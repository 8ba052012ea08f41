use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::kmeans::{minibatch_kmeans, KMeansParams};
use super::sparse::SparseMatrix;
use super::ClusterError;
use crate::rng::derive_seed;

/// Relative rise in inertia between consecutive candidates tolerated before
/// a curve is flagged as non-monotone.
pub const MONOTONE_TOLERANCE: f64 = 0.01;

const DEGENERATE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElbowWarning {
    /// Every point sits on the chord; the first candidate was taken.
    Degenerate,
    NonMonotone {
        k_from: usize,
        k_to: usize,
        rise: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve {
    pub candidate_ks: Vec<usize>,
    pub inertias: Vec<f64>,
    /// Seed used for each candidate's run.
    pub seeds: Vec<u64>,
    /// Normalized signed distance below the chord.
    pub distances: Vec<f64>,
    pub chosen_k: usize,
    pub warnings: Vec<ElbowWarning>,
}

impl ElbowCurve {
    /// Knee by maximum distance to the chord from the first to the last
    /// point. Both axes are rescaled to [0, 1] first so the units of k and
    /// inertia do not matter.
    pub fn from_points(candidate_ks: Vec<usize>, inertias: Vec<f64>, seeds: Vec<u64>) -> Result<Self, ClusterError> {
        let n = candidate_ks.len();
        if n < 3 || inertias.len() != n || candidate_ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ClusterError::BadCandidates);
        }
        let mut warnings = Vec::new();
        for i in 1..n {
            let (prev, cur) = (inertias[i - 1], inertias[i]);
            if cur > prev * (1.0 + MONOTONE_TOLERANCE) && cur - prev > DEGENERATE_DISTANCE {
                warnings.push(ElbowWarning::NonMonotone {
                    k_from: candidate_ks[i - 1],
                    k_to: candidate_ks[i],
                    rise: cur - prev,
                });
            }
        }

        let (k0, k1) = (candidate_ks[0] as f64, candidate_ks[n - 1] as f64);
        let (y0, y1) = (inertias[0], inertias[n - 1]);
        let span = y0 - y1;
        let distances: Vec<f64> = if span.abs() <= f64::EPSILON * y0.abs().max(1.0) {
            alloc::vec![0.0; n]
        } else {
            // chord runs from (0, 1) to (1, 0): distance below it is (1 - x - y)/√2
            candidate_ks
                .iter()
                .zip(&inertias)
                .map(|(&k, &y)| {
                    let x = (k as f64 - k0) / (k1 - k0);
                    let y = (y - y1) / span;
                    (1.0 - x - y) / core::f64::consts::SQRT_2
                })
                .collect()
        };
        let mut best = 0;
        for i in 1..n {
            if distances[i] > distances[best] {
                best = i;
            }
        }
        if distances[best] <= DEGENERATE_DISTANCE {
            best = 0;
            warnings.push(ElbowWarning::Degenerate);
        }
        for w in &warnings {
            log::warn!("elbow: {w:?}");
        }
        Ok(ElbowCurve { chosen_k: candidate_ks[best], candidate_ks, inertias, seeds, distances, warnings })
    }
}

/// Seed for the run at `k`, derived from the base seed.
pub fn seed_for_k(seed: u64, k: usize) -> u64 {
    derive_seed(seed, k as u64)
}

/// Runs mini-batch k-means at each candidate k (all other settings from
/// `base`) and picks the knee.
pub fn elbow_select(m: &SparseMatrix, candidate_ks: &[usize], base: &KMeansParams) -> Result<ElbowCurve, ClusterError> {
    if candidate_ks.len() < 3 || candidate_ks.windows(2).any(|w| w[0] >= w[1]) || candidate_ks[0] == 0 {
        return Err(ClusterError::BadCandidates);
    }
    let mut inertias = Vec::with_capacity(candidate_ks.len());
    let mut seeds = Vec::with_capacity(candidate_ks.len());
    for &k in candidate_ks {
        let seed = seed_for_k(base.seed, k);
        let params = KMeansParams { k, seed, ..base.clone() };
        inertias.push(minibatch_kmeans(m, &params)?.inertia);
        seeds.push(seed);
    }
    ElbowCurve::from_points(candidate_ks.to_vec(), inertias, seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;
    use rand_distr_free::gaussian;

    mod rand_distr_free {
        use rand::Rng;
        /// Box-Muller, enough for test data.
        pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
        }
    }

    fn blobs(centers: usize, per: usize, dim: usize, spread: f64, seed: u64) -> SparseMatrix {
        let mut rng = crate::rng::seeded(seed);
        let mut rows = Vec::new();
        for c in 0..centers {
            let mut center = vec![0.0; dim];
            center[c % dim] = 10.0;
            center[(c + 1) % dim] += 5.0 * (c / dim) as f64;
            for _ in 0..per {
                rows.push(center.iter().map(|&x| x + spread * gaussian(&mut rng)).collect::<Vec<_>>());
            }
        }
        // shuffle so mini-batches are mixed
        for i in (1..rows.len()).rev() {
            let j = rng.gen_range(0..=i);
            rows.swap(i, j);
        }
        SparseMatrix::from_dense(&rows)
    }

    #[test]
    fn eight_blobs_knee_near_eight() {
        let m = blobs(8, 60, 8, 0.5, 11);
        let ks: Vec<usize> = (2..=14).collect();
        let curve = elbow_select(&m, &ks, &KMeansParams::new(0, 5)).unwrap();
        assert!((7..=9).contains(&curve.chosen_k), "{curve:?}");
        assert!(curve.warnings.is_empty(), "{:?}", curve.warnings);
    }

    #[test]
    fn linear_curve_is_degenerate() {
        let ks = vec![2, 3, 4, 5];
        let curve = ElbowCurve::from_points(ks, vec![40.0, 30.0, 20.0, 10.0], vec![0; 4]).unwrap();
        assert_eq!(curve.chosen_k, 2);
        assert_eq!(curve.warnings, vec![ElbowWarning::Degenerate]);
        assert!(curve.distances.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn flat_curve_is_degenerate() {
        let curve = ElbowCurve::from_points(vec![1, 2, 3], vec![5.0; 3], vec![0; 3]).unwrap();
        assert_eq!(curve.chosen_k, 1);
        assert_eq!(curve.warnings, vec![ElbowWarning::Degenerate]);
    }

    #[test]
    fn obvious_knee() {
        let curve =
            ElbowCurve::from_points(vec![1, 2, 3, 4, 5], vec![100.0, 20.0, 15.0, 12.0, 10.0], vec![0; 5]).unwrap();
        assert_eq!(curve.chosen_k, 2);
        assert!(curve.warnings.is_empty());
    }

    #[test]
    fn scaling_inertia_does_not_move_knee() {
        let ys = [100.0, 60.0, 35.0, 30.0, 27.0, 25.0];
        let ks: Vec<usize> = (2..8).collect();
        let a = ElbowCurve::from_points(ks.clone(), ys.to_vec(), vec![0; 6]).unwrap();
        let b = ElbowCurve::from_points(ks, ys.iter().map(|y| y * 1e6).collect(), vec![0; 6]).unwrap();
        assert_eq!(a.chosen_k, b.chosen_k);
    }

    #[test]
    fn non_monotone_warns_but_still_picks() {
        let curve = ElbowCurve::from_points(vec![1, 2, 3, 4], vec![100.0, 20.0, 30.0, 10.0], vec![0; 4]).unwrap();
        assert_eq!(curve.chosen_k, 2);
        assert!(matches!(curve.warnings[0], ElbowWarning::NonMonotone { k_from: 2, k_to: 3, .. }));
    }

    #[test]
    fn bad_candidates() {
        let m = SparseMatrix::from_dense(&[vec![1.0], vec![2.0], vec![3.0]]);
        let p = KMeansParams::new(0, 0);
        assert_eq!(elbow_select(&m, &[1, 2], &p).unwrap_err(), ClusterError::BadCandidates);
        assert_eq!(elbow_select(&m, &[1, 3, 2], &p).unwrap_err(), ClusterError::BadCandidates);
    }
}
