//! Fixed-point re-estimation of an asymmetric Dirichlet prior over
//! document–topic proportions:
//!
//! ```text
//! α_k ← α_k · (Σ_d Ψ(n_dk + α_k) − D·Ψ(α_k)) / (Σ_d Ψ(n_d + Σα) − D·Ψ(Σα))
//! ```
//!
//! The sums are evaluated over count histograms: documents sharing a count
//! contribute identical terms, and a zero count contributes nothing.

use alloc::vec;
use alloc::vec::Vec;

use super::gibbs::LdaModel;
use super::LdaError;
use crate::special::digamma;

pub const ALPHA_TOLERANCE: f64 = 1e-5;
pub const ALPHA_MAX_STEPS: usize = 1000;
pub const ALPHA_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFit {
    pub alpha: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
}

fn histogram(values: impl Iterator<Item = u32>) -> Vec<u32> {
    let mut h = Vec::new();
    for v in values {
        let v = v as usize;
        if v >= h.len() {
            h.resize(v + 1, 0);
        }
        h[v] += 1;
    }
    h
}

/// `Σ_n hist[n] · (Ψ(n + a) − Ψ(a))` over n ≥ 1.
fn digamma_gap(hist: &[u32], a: f64) -> f64 {
    let base = digamma(a);
    hist.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c > 0)
        .map(|(n, &c)| f64::from(c) * (digamma(n as f64 + a) - base))
        .sum()
}

/// Fits alpha to document–topic counts (`D × K` row-major) and document
/// lengths, starting from `alpha`. Iterates until the largest relative
/// change falls below [`ALPHA_TOLERANCE`] or [`ALPHA_MAX_STEPS`] steps.
pub fn fit_alpha(doc_topic: &[u32], doc_lengths: &[u32], alpha: &[f64]) -> Result<AlphaFit, LdaError> {
    let k = alpha.len();
    if k == 0 {
        return Err(LdaError::ZeroTopics);
    }
    if doc_topic.len() != doc_lengths.len() * k {
        return Err(LdaError::AlphaLength { got: k, expected: doc_topic.len() / doc_lengths.len().max(1) });
    }
    let topic_hists: Vec<Vec<u32>> = (0..k).map(|t| histogram(doc_topic.iter().skip(t).step_by(k).copied())).collect();
    let length_hist = histogram(doc_lengths.iter().copied());

    let mut current = alpha.to_vec();
    let mut next = vec![0.0; k];
    for step in 1..=ALPHA_MAX_STEPS {
        let sum: f64 = current.iter().sum();
        let denom = digamma_gap(&length_hist, sum);
        let mut max_rel = 0.0f64;
        for t in 0..k {
            let num = digamma_gap(&topic_hists[t], current[t]);
            let updated = (current[t] * num / denom).max(ALPHA_FLOOR);
            if !updated.is_finite() {
                return Err(LdaError::NonFiniteAlpha);
            }
            max_rel = max_rel.max((updated - current[t]).abs() / current[t]);
            next[t] = updated;
        }
        core::mem::swap(&mut current, &mut next);
        if max_rel < ALPHA_TOLERANCE {
            return Ok(AlphaFit { alpha: current, steps: step, converged: true });
        }
    }
    Ok(AlphaFit { alpha: current, steps: ALPHA_MAX_STEPS, converged: false })
}

/// Re-fits the model's alpha from its current counts.
pub fn optimize_alpha(model: &LdaModel) -> Result<AlphaFit, LdaError> {
    if model.iterations_run == 0 {
        return Err(LdaError::NotSampled);
    }
    let lengths: Vec<u32> = (0..model.num_docs()).map(|d| model.doc_len(d) as u32).collect();
    fit_alpha(&model.doc_topic, &lengths, &model.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct evaluation of one fixed-point step, one term per document.
    fn direct_step(counts: &[&[u32]], alpha: &[f64]) -> Vec<f64> {
        let d = counts.len() as f64;
        let sum: f64 = alpha.iter().sum();
        let denom: f64 =
            counts.iter().map(|row| digamma(row.iter().sum::<u32>() as f64 + sum)).sum::<f64>() - d * digamma(sum);
        alpha
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let num: f64 = counts.iter().map(|row| digamma(f64::from(row[k]) + a)).sum::<f64>() - d * digamma(a);
                (a * num / denom).max(ALPHA_FLOOR)
            })
            .collect()
    }

    fn flat(counts: &[&[u32]]) -> (Vec<u32>, Vec<u32>) {
        let dt = counts.iter().flat_map(|r| r.iter().copied()).collect();
        let lens = counts.iter().map(|r| r.iter().sum()).collect();
        (dt, lens)
    }

    fn run_direct(counts: &[&[u32]], alpha: &[f64]) -> Vec<f64> {
        let mut a = alpha.to_vec();
        for _ in 0..ALPHA_MAX_STEPS {
            let next = direct_step(counts, &a);
            let rel = next.iter().zip(&a).map(|(n, o)| (n - o).abs() / o).fold(0.0, f64::max);
            a = next;
            if rel < ALPHA_TOLERANCE {
                break;
            }
        }
        a
    }

    #[test]
    fn symmetric_counts_keep_alpha_symmetric() {
        let counts: [&[u32]; 3] = [&[3, 3, 3], &[3, 3, 3], &[3, 3, 3]];
        let (dt, lens) = flat(&counts);
        let fit = fit_alpha(&dt, &lens, &[0.7, 0.7, 0.7]).unwrap();
        let a0 = fit.alpha[0];
        assert!(fit.alpha.iter().all(|&a| (a - a0).abs() <= 1e-10));
        assert!(a0.is_finite() && a0 > 0.0);
    }

    #[test]
    fn concentrated_counts_raise_first_component() {
        // Oracles: the direct per-document update run to convergence, and the
        // same iteration in a scipy scratch script, which stopped after 127
        // steps at (0.8739709449333752, 0.16802264890593654).
        let counts: [&[u32]; 3] = [&[8, 0], &[2, 3], &[6, 0]];
        let (dt, lens) = flat(&counts);
        let fit = fit_alpha(&dt, &lens, &[1.0, 1.0]).unwrap();
        assert!(fit.converged);
        assert!(fit.alpha[0] > fit.alpha[1]);
        let oracle = run_direct(&counts, &[1.0, 1.0]);
        for (a, b) in fit.alpha.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert_eq!(fit.steps, 127);
        assert!((fit.alpha[0] - 0.873_970_944_933_375_2).abs() < 1e-9);
        assert!((fit.alpha[1] - 0.168_022_648_905_936_54).abs() < 1e-9);
    }

    #[test]
    fn underdispersed_counts_still_rank_first_component_highest() {
        // Proportions too regular for a finite maximum; alpha keeps growing
        // until the step cap but the ordering is already settled.
        let counts: [&[u32]; 3] = [&[5, 1], &[6, 0], &[4, 1]];
        let (dt, lens) = flat(&counts);
        let fit = fit_alpha(&dt, &lens, &[1.0, 1.0]).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.steps, ALPHA_MAX_STEPS);
        assert!(fit.alpha[0] > fit.alpha[1]);
    }

    #[test]
    fn single_document_is_well_defined() {
        let fit = fit_alpha(&[4, 2, 0], &[6], &[0.5, 0.5, 0.5]).unwrap();
        assert!(fit.alpha.iter().all(|a| a.is_finite() && *a >= ALPHA_FLOOR));
    }

    #[test]
    fn unused_topic_hits_floor() {
        let counts: [&[u32]; 2] = [&[3, 0], &[2, 0]];
        let (dt, lens) = flat(&counts);
        let fit = fit_alpha(&dt, &lens, &[1.0, 1.0]).unwrap();
        assert!(fit.alpha[1] < 1e-3);
        assert!(fit.alpha[1] >= ALPHA_FLOOR);
    }

    proptest! {
        #[test]
        fn histogram_fit_matches_direct_fit(
            rows in proptest::collection::vec(proptest::collection::vec(0u32..6, 3), 1..8),
            a in proptest::collection::vec(0.05f64..3.0, 3),
        ) {
            prop_assume!(rows.iter().all(|r| r.iter().sum::<u32>() > 0));
            let refs: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
            let (dt, lens) = flat(&refs);
            let fit = fit_alpha(&dt, &lens, &a).unwrap();
            let oracle = run_direct(&refs, &a);
            for (x, y) in fit.alpha.iter().zip(&oracle) {
                prop_assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-6), "{} vs {}", x, y);
            }
        }
    }
}
