//! Splitting a point set into local clusters.
//!
//! [`kmeans`] is the Lloyd baseline, [`mmc_bipartition`] the maximum margin
//! two-way split, [`ammd`] the spread measure that drives
//! [`adaptive_split`], and [`fixed_split`] produces a requested number of
//! clusters with either method.

mod ammd;
mod kmeans;
mod mmc;
mod split;
mod svm;

pub use ammd::{ammd, AmmdReport};
pub use kmeans::{kmeans, kmeans_detailed, KMeansResult};
pub use mmc::{mmc_bipartition, Hyperplane, MmcConfig, MmcResult, RestartTrace};
pub use split::{adaptive_split, fixed_split, SplitConfig, SplitMethod};
pub use svm::{train_linear_svm, SvmModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster label per point, `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ClusterCountOutOfRange { k, n: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidConfig(format!("label {bad} not below k = {k}")));
        }
        Ok(Partition { labels, k })
    }

    /// Every point in cluster 0.
    pub fn single(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            k: 1,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Point indices of each cluster, ascending. Empty clusters give empty
    /// vectors.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }

    /// Renumbers clusters by first appearance and drops empty ones.
    pub fn compact(&self) -> Partition {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Partition { labels, k: next.max(1) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_cover_points() {
        let p = Partition::new(vec![1, 0, 1, 2], 4).unwrap();
        assert_eq!(p.clusters(), vec![vec![1], vec![0, 2], vec![3], vec![]]);
        assert_eq!(p.sizes(), vec![1, 2, 1, 0]);
        let c = p.compact();
        assert_eq!(c.labels(), &[0, 1, 0, 2]);
        assert_eq!(c.k(), 3);
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(Partition::new(vec![0, 3], 3).is_err());
        assert!(Partition::new(vec![], 0).is_err());
    }
}
