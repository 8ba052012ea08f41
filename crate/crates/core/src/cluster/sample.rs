use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;

use super::ClusterError;
use crate::rng::{derive_seed, seeded};

/// Draws up to `per_cluster_n` ids from each cluster without replacement.
/// Each cluster uses its own stream derived from `seed`, so adding a cluster
/// does not change the draws of the others. Ids keep their input order.
pub fn stratified_sample(
    ids: &[String],
    labels: &[u32],
    per_cluster_n: usize,
    seed: u64,
) -> Result<BTreeMap<u32, Vec<String>>, ClusterError> {
    if per_cluster_n == 0 {
        return Err(ClusterError::ZeroSampleSize);
    }
    if ids.len() != labels.len() {
        return Err(ClusterError::LengthMismatch { ids: ids.len(), labels: labels.len() });
    }
    let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    let mut out = BTreeMap::new();
    for (cluster, rows) in members {
        let picked: Vec<usize> = if rows.len() <= per_cluster_n {
            rows
        } else {
            let mut rng = seeded(derive_seed(seed, u64::from(cluster)));
            let mut pos = index::sample(&mut rng, rows.len(), per_cluster_n).into_vec();
            pos.sort_unstable();
            pos.into_iter().map(|p| rows[p]).collect()
        };
        out.insert(cluster, picked.into_iter().map(|i| ids[i].clone()).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn sizes() {
        let mut labels = vec![0u32; 100];
        labels.extend(vec![1u32; 20]);
        let s = stratified_sample(&ids(120), &labels, 30, 7).unwrap();
        assert_eq!(s[&0].len(), 30);
        assert_eq!(s[&0].iter().collect::<BTreeSet<_>>().len(), 30);
        assert_eq!(s[&1], ids(120)[100..].to_vec());
    }

    #[test]
    fn deterministic() {
        let labels: Vec<u32> = (0..300).map(|i| i % 3).collect();
        let a = stratified_sample(&ids(300), &labels, 30, 1).unwrap();
        let b = stratified_sample(&ids(300), &labels, 30, 1).unwrap();
        let c = stratified_sample(&ids(300), &labels, 30, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn errors() {
        assert_eq!(stratified_sample(&ids(2), &[0, 0], 0, 0).unwrap_err(), ClusterError::ZeroSampleSize);
        assert_eq!(
            stratified_sample(&ids(2), &[0], 1, 0).unwrap_err(),
            ClusterError::LengthMismatch { ids: 2, labels: 1 }
        );
    }

    proptest! {
        #[test]
        fn members_only_and_no_duplicates(
            labels in proptest::collection::vec(0u32..5, 1..200),
            n in 1usize..40,
            seed in any::<u64>(),
        ) {
            let all = ids(labels.len());
            let s = stratified_sample(&all, &labels, n, seed).unwrap();
            for (c, picked) in &s {
                let size = labels.iter().filter(|&&l| l == *c).count();
                prop_assert_eq!(picked.len(), size.min(n));
                let uniq: BTreeSet<_> = picked.iter().collect();
                prop_assert_eq!(uniq.len(), picked.len());
                for id in picked {
                    let i: usize = id[1..].parse().unwrap();
                    prop_assert_eq!(labels[i], *c);
                }
            }
        }
    }
}
