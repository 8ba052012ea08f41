use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelShare {
    pub label: String,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEstimate {
    /// In label-set order.
    pub per_label_share: Vec<LabelShare>,
    pub per_cluster_breakdown: BTreeMap<u32, Vec<LabelShare>>,
    pub cluster_weights: BTreeMap<u32, f64>,
}

impl CategoryEstimate {
    pub fn share(&self, label: &str) -> Option<f64> {
        self.per_label_share.iter().find(|s| s.label == label).map(|s| s.share)
    }
}

/// `share(label) = Σ_c ratio(label | sample of c) · weight(c)`, where
/// `final_labels` holds `(cluster, label index)` per sampled tweet and
/// `cluster_weights[c]` is the cluster's share of the whole corpus.
pub fn weighted_estimate(
    labels: &[String],
    final_labels: &[(u32, usize)],
    cluster_weights: &[f64],
) -> CategoryEstimate {
    let mut counts: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for &(c, l) in final_labels {
        counts.entry(c).or_insert_with(|| vec![0; labels.len()])[l] += 1;
    }
    let mut totals = vec![0.0; labels.len()];
    let mut per_cluster_breakdown = BTreeMap::new();
    let mut weights = BTreeMap::new();
    for (c, row) in counts {
        let n: u64 = row.iter().sum();
        let w = cluster_weights[c as usize];
        let ratios: Vec<f64> = row.iter().map(|&x| x as f64 / n as f64).collect();
        for (t, r) in totals.iter_mut().zip(&ratios) {
            *t += r * w;
        }
        per_cluster_breakdown.insert(c, zip_labels(labels, ratios));
        weights.insert(c, w);
    }
    CategoryEstimate { per_label_share: zip_labels(labels, totals), per_cluster_breakdown, cluster_weights: weights }
}

fn zip_labels(labels: &[String], values: Vec<f64>) -> Vec<LabelShare> {
    labels.iter().cloned().zip(values).map(|(label, share)| LabelShare { label, share }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn names() -> Vec<String> {
        ["satire", "other"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn weighted_fixture() {
        // cluster 0: 2 of 4 satire, cluster 1: 1 of 4 satire
        let fl = [(0, 0), (0, 0), (0, 1), (0, 1), (1, 0), (1, 1), (1, 1), (1, 1)];
        let e = weighted_estimate(&names(), &fl, &[0.6, 0.4]);
        assert_eq!(e.share("satire"), Some(0.4));
        assert_eq!(e.per_cluster_breakdown[&1][0].share, 0.25);
    }

    #[test]
    fn single_cluster_identity() {
        let fl = [(0, 0), (0, 1), (0, 1)];
        let e = weighted_estimate(&names(), &fl, &[1.0]);
        assert_eq!(e.per_label_share, e.per_cluster_breakdown[&0]);
    }

    proptest! {
        #[test]
        fn shares_sum_to_one(
            fl in proptest::collection::vec((0u32..3, 0usize..2), 1..80),
            raw in proptest::collection::vec(0.01f64..1.0, 3),
        ) {
            // every cluster present so the weights of sampled clusters sum to 1
            let mut fl = fl;
            fl.extend([(0, 0), (1, 0), (2, 1)]);
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let e = weighted_estimate(&names(), &fl, &w);
            let total: f64 = e.per_label_share.iter().map(|x| x.share).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for b in e.per_cluster_breakdown.values() {
                prop_assert!((b.iter().map(|x| x.share).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
