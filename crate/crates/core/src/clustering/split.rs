use serde::{Deserialize, Serialize};

use super::{ammd, kmeans, mmc_bipartition, MmcConfig, Partition};
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::{par, seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SplitMethod {
    #[default]
    Mmc,
    KMeans,
}

impl std::fmt::Display for SplitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitMethod::Mmc => "mmc",
            SplitMethod::KMeans => "kmeans",
        })
    }
}

impl std::str::FromStr for SplitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mmc" => Ok(SplitMethod::Mmc),
            "kmeans" | "k-means" => Ok(SplitMethod::KMeans),
            other => Err(Error::InvalidConfig(format!("unknown split method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Clusters whose AMMD falls below this are not split further.
    pub ammd_threshold: f64,
    /// Clusters of at most this many points are not split further.
    pub min_cluster_size: usize,
    pub method: SplitMethod,
    /// Used when `method` is MMC; its seed is replaced per node.
    pub mmc: MmcConfig,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ammd_threshold: 1.0,
            min_cluster_size: 3,
            method: SplitMethod::Mmc,
            mmc: MmcConfig::default(),
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ammd_threshold.is_nan() || self.ammd_threshold <= 0.0 {
            return Err(Error::InvalidConfig("ammd_threshold must be positive".into()));
        }
        if self.min_cluster_size == 0 {
            return Err(Error::InvalidConfig("min_cluster_size must be at least 1".into()));
        }
        self.mmc.validate()
    }
}

/// Two-way split of `indices` (a subset of `points`). `None` when the
/// method cannot produce two nonempty sides.
fn bisect(
    points: &PointSet,
    indices: &[usize],
    method: SplitMethod,
    mmc: &MmcConfig,
    node_seed: u64,
) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    if indices.len() < 2 {
        return Ok(None);
    }
    let sub = points.subset(indices)?;
    let labels = match method {
        SplitMethod::Mmc => {
            let cfg = MmcConfig {
                seed: node_seed,
                ..mmc.clone()
            };
            mmc_bipartition(&sub, &cfg)?.partition
        }
        SplitMethod::KMeans => kmeans(&sub, 2, node_seed)?.compact(),
    };
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (&i, &l) in indices.iter().zip(labels.labels()) {
        if l == 0 {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    if left.is_empty() || right.is_empty() {
        return Ok(None);
    }
    Ok(Some((left, right)))
}

/// Recursively bisects until every cluster has AMMD below the threshold or
/// at most `min_cluster_size` points. Clusters are numbered depth first,
/// the side holding the lower point index first.
pub fn adaptive_split(points: &PointSet, cfg: &SplitConfig) -> Result<Partition> {
    cfg.validate()?;
    let all: Vec<usize> = (0..points.len()).collect();
    let leaves = recurse(points, all, cfg, cfg.seed)?;
    let mut labels = vec![0; points.len()];
    for (c, leaf) in leaves.iter().enumerate() {
        for &i in leaf {
            labels[i] = c;
        }
    }
    Partition::new(labels, leaves.len().max(1))
}

fn recurse(points: &PointSet, indices: Vec<usize>, cfg: &SplitConfig, node_seed: u64) -> Result<Vec<Vec<usize>>> {
    if indices.len() <= cfg.min_cluster_size {
        return Ok(vec![indices]);
    }
    let spread = ammd(&points.subset(&indices)?)?.ammd;
    if spread < cfg.ammd_threshold {
        return Ok(vec![indices]);
    }
    let Some((left, right)) = bisect(points, &indices, cfg.method, &cfg.mmc, node_seed)? else {
        return Ok(vec![indices]);
    };
    let (l, r) = par::join(
        || recurse(points, left, cfg, seed::derive(node_seed, 1)),
        || recurse(points, right, cfg, seed::derive(node_seed, 2)),
    );
    let mut out = l?;
    out.extend(r?);
    Ok(out)
}

/// Exactly `k` nonempty clusters. K-means runs k-way directly; MMC bisects
/// the cluster with the largest AMMD (lowest index on ties) until `k`
/// clusters exist.
pub fn fixed_split(points: &PointSet, k: usize, method: SplitMethod, mmc: &MmcConfig, seed: u64) -> Result<Partition> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::ClusterCountOutOfRange { k, n });
    }
    match method {
        SplitMethod::KMeans => kmeans(points, k, seed),
        SplitMethod::Mmc => {
            mmc.validate()?;
            let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
            let mut spreads = vec![ammd(points)?.ammd];
            let mut step = 0u64;
            while clusters.len() < k {
                let mut order: Vec<usize> = (0..clusters.len()).filter(|&c| clusters[c].len() >= 2).collect();
                order.sort_by(|&a, &b| spreads[b].total_cmp(&spreads[a]).then(a.cmp(&b)));
                let mut split = None;
                for c in order {
                    if let Some(sides) = bisect(points, &clusters[c], method, mmc, seed::derive(seed, step))? {
                        split = Some((c, sides));
                        break;
                    }
                }
                step += 1;
                let Some((c, (left, right))) = split else {
                    // Only coincident points remain; peel one off.
                    let c = clusters.iter().position(|cl| cl.len() >= 2).expect("k <= n");
                    let last = clusters[c].pop().expect("nonempty");
                    spreads[c] = ammd(&points.subset(&clusters[c])?)?.ammd;
                    clusters.push(vec![last]);
                    spreads.push(0.0);
                    continue;
                };
                spreads[c] = ammd(&points.subset(&left)?)?.ammd;
                spreads.push(ammd(&points.subset(&right)?)?.ammd);
                clusters[c] = left;
                clusters.push(right);
            }
            let mut labels = vec![0; n];
            for (c, cl) in clusters.iter().enumerate() {
                for &i in cl {
                    labels[i] = c;
                }
            }
            Partition::new(labels, k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new("l", None, xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn below_threshold_is_one_cluster() {
        let cfg = SplitConfig {
            ammd_threshold: 100.0,
            ..SplitConfig::default()
        };
        let p = adaptive_split(&line(&[0.0, 1.0, 2.0, 3.0, 9.0]), &cfg).unwrap();
        assert_eq!(p.k(), 1);
    }

    #[test]
    fn size_floor_is_one_cluster() {
        let pts = line(&[0.0, 10.0, 20.0, 30.0]);
        let cfg = SplitConfig {
            ammd_threshold: 1e-6,
            min_cluster_size: 4,
            ..SplitConfig::default()
        };
        assert_eq!(adaptive_split(&pts, &cfg).unwrap().k(), 1);
    }

    #[test]
    fn fixed_three_groups_both_methods() {
        let pts = line(&[0.0, 0.1, 10.0, 10.1, 20.0, 20.1]);
        for method in [SplitMethod::Mmc, SplitMethod::KMeans] {
            let p = fixed_split(&pts, 3, method, &MmcConfig::default(), 1).unwrap();
            let l = p.labels();
            assert_eq!(p.k(), 3);
            assert_eq!(l[0], l[1], "{method}");
            assert_eq!(l[2], l[3], "{method}");
            assert_eq!(l[4], l[5], "{method}");
            assert!(l[0] != l[2] && l[2] != l[4] && l[0] != l[4], "{method}");
        }
    }

    #[test]
    fn fixed_split_on_duplicates_fills_every_cluster() {
        let pts = line(&[1.0, 1.0, 1.0, 1.0]);
        let p = fixed_split(&pts, 4, SplitMethod::Mmc, &MmcConfig::default(), 0).unwrap();
        assert!(p.sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn method_round_trip() {
        for m in [SplitMethod::Mmc, SplitMethod::KMeans] {
            assert_eq!(m.to_string().parse::<SplitMethod>().unwrap(), m);
        }
    }
}
