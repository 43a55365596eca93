use serde::{Deserialize, Serialize};

use super::{LocalHullModel, SetDistance};
use crate::error::{Error, Result};
use crate::geometry::{hull_distance, point_to_hull_distance, Hull, PointSet, SolverConfig};
use crate::par;

/// Gallery samples grouped by their closest reference hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcAssignment {
    /// Closest reference hull of each gallery sample (lowest index on ties).
    pub nearest: Vec<usize>,
    /// Distance from each gallery sample to that hull.
    pub distance: Vec<f64>,
    /// Reference hull a sample counts towards, or `None` when the top-m rule
    /// dropped it.
    pub retained: Vec<Option<usize>>,
    /// Retained gallery indices per reference hull, ascending. May be empty.
    pub clusters: Vec<Vec<usize>>,
    pub converged: bool,
}

/// Assigns every gallery sample to its closest reference hull. With
/// `top_m_rule`, each reference hull keeps only as many of its closest
/// samples as it has vertices itself.
pub fn arc_assign(
    query: &LocalHullModel,
    gallery: &PointSet,
    solver: &SolverConfig,
    top_m_rule: bool,
) -> Result<ArcAssignment> {
    query.source.check_dim(gallery.dim())?;
    let hulls: Vec<Hull> = (0..query.len()).map(|k| query.hull(k)).collect();
    let per_point = par::map_range(gallery.len(), |i| -> Result<(usize, f64, bool)> {
        let p = gallery.point(i);
        let mut best = (0, f64::INFINITY, true);
        for (k, h) in hulls.iter().enumerate() {
            let r = point_to_hull_distance(p, h, solver)?;
            best.2 &= r.converged;
            if r.distance < best.1 {
                best = (k, r.distance, best.2);
            }
        }
        Ok(best)
    });
    let mut nearest = Vec::with_capacity(gallery.len());
    let mut distance = Vec::with_capacity(gallery.len());
    let mut converged = true;
    for r in per_point {
        let (k, d, c) = r?;
        converged &= c;
        nearest.push(k);
        distance.push(d);
    }
    let mut clusters = vec![Vec::new(); query.len()];
    for (i, &k) in nearest.iter().enumerate() {
        clusters[k].push(i);
    }
    if top_m_rule {
        for (k, members) in clusters.iter_mut().enumerate() {
            let m = query.clusters[k].len();
            if members.len() > m {
                members.sort_by(|&a, &b| distance[a].total_cmp(&distance[b]).then(a.cmp(&b)));
                members.truncate(m);
                members.sort_unstable();
            }
        }
    }
    let mut retained = vec![None; gallery.len()];
    for (k, members) in clusters.iter().enumerate() {
        for &i in members {
            retained[i] = Some(k);
        }
    }
    Ok(ArcAssignment {
        nearest,
        distance,
        retained,
        clusters,
        converged,
    })
}

/// Compares each reference hull with the gallery samples assigned to it and
/// returns the smallest of those distances. Reference hulls that received no
/// samples are skipped.
pub fn arc_distance(
    query: &LocalHullModel,
    gallery: &PointSet,
    solver: &SolverConfig,
    top_m_rule: bool,
) -> Result<SetDistance> {
    let assignment = arc_assign(query, gallery, solver, top_m_rule)?;
    let live: Vec<usize> = (0..query.len())
        .filter(|&k| !assignment.clusters[k].is_empty())
        .collect();
    if live.is_empty() {
        return Err(Error::NoComparablePair);
    }
    let values = par::map(&live, |&k| {
        let gh = Hull::new(gallery, assignment.clusters[k].clone(), query.kind)?;
        hull_distance(&query.hull(k), &gh, solver)
    });
    let mut per_pair = vec![vec![None; query.len()]; query.len()];
    let mut best = (f64::INFINITY, 0);
    let mut converged = assignment.converged;
    for (&k, r) in live.iter().zip(values) {
        let r = r?;
        converged &= r.converged;
        let v = r.distance;
        per_pair[k][k] = Some(v);
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(SetDistance {
        value: best.0,
        best_pair: (best.1, best.1),
        converged,
        per_pair: Some(per_pair),
        assignment: Some(assignment),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Partition;
    use crate::matching::single_hull_distance;
    use crate::HullKind;

    fn set(rows: Vec<Vec<f64>>) -> PointSet {
        PointSet::new("s", None, rows).unwrap()
    }

    fn two_cluster_query() -> LocalHullModel {
        let q = set(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![100.0, 0.0],
            vec![101.0, 0.0],
            vec![100.0, 1.0],
        ]);
        LocalHullModel::new(q, Partition::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap(), HullKind::Convex).unwrap()
    }

    #[test]
    fn far_cluster_receives_nothing() {
        let g = set(vec![vec![0.2, 0.2], vec![-0.5, 0.0], vec![0.3, -0.4]]);
        let a = arc_assign(&two_cluster_query(), &g, &SolverConfig::default(), true).unwrap();
        assert_eq!(a.nearest, vec![0, 0, 0]);
        assert_eq!(a.clusters[1], Vec::<usize>::new());
        let d = arc_distance(&two_cluster_query(), &g, &SolverConfig::default(), true).unwrap();
        assert_eq!(d.best_pair, (0, 0));
        assert_eq!(d.per_pair.unwrap()[1][1], None);
    }

    #[test]
    fn top_m_keeps_closest() {
        let q = set(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        let model = LocalHullModel::single(q, HullKind::Convex);
        let g = set(vec![
            vec![0.5, 3.0],
            vec![0.5, 1.0],
            vec![5.0, 0.0],
            vec![0.5, 0.5],
            vec![0.5, 2.0],
        ]);
        let a = arc_assign(&model, &g, &SolverConfig::default(), true).unwrap();
        assert_eq!(a.clusters[0], vec![1, 3]);
        assert_eq!(a.retained, vec![None, Some(0), None, Some(0), None]);
        let all = arc_assign(&model, &g, &SolverConfig::default(), false).unwrap();
        assert_eq!(all.clusters[0], vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn one_cluster_reduces_to_single_hull() {
        let q = set(vec![vec![0.0, 0.0], vec![1.0, 0.3], vec![0.2, 1.0], vec![0.7, 0.9]]);
        let g = set(vec![vec![3.0, 0.0], vec![4.0, 1.0], vec![3.5, 2.0]]);
        let cfg = SolverConfig::default();
        for kind in [HullKind::Convex, HullKind::Affine] {
            let arc = arc_distance(&LocalHullModel::single(q.clone(), kind), &g, &cfg, true).unwrap();
            let single = single_hull_distance(&q, &g, kind, &cfg).unwrap();
            assert_eq!(arc.value.to_bits(), single.value.to_bits(), "{kind}");
        }
    }

    #[test]
    fn query_against_itself_is_zero() {
        let m = two_cluster_query();
        let d = arc_distance(&m, &m.source().clone(), &SolverConfig::default(), true).unwrap();
        assert_eq!(d.value, 0.0);
    }
}
