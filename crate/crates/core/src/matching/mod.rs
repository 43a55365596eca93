//! Set-to-set distances and the gallery classifier.
//!
//! A set is either modelled as one hull over all its samples or as a
//! [`LocalHullModel`] with one hull per cluster. Two sets of local hulls are
//! compared over every cluster pair ([`ccp_distance`]), or the gallery set is
//! re-clustered around the query's hulls and only corresponding clusters are
//! compared ([`arc_distance`]).

mod arc;
mod classify;

pub use arc::{arc_assign, arc_distance, ArcAssignment};
pub use classify::{classify, ClusterSpec, Comparison, Gallery, GalleryEntry, MatchConfig, MatchResult};

use serde::{Deserialize, Serialize};

use crate::clustering::{adaptive_split, fixed_split, Partition};
use crate::error::{Error, Result};
use crate::geometry::{dist_sq, hull_distance, Hull, HullKind, PointSet, SolverConfig};
use crate::par;

/// A point set with one hull per nonempty cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHullModel {
    source: PointSet,
    partition: Partition,
    kind: HullKind,
    clusters: Vec<Vec<usize>>,
}

impl LocalHullModel {
    pub fn new(source: PointSet, partition: Partition, kind: HullKind) -> Result<Self> {
        if partition.len() != source.len() {
            return Err(Error::DimensionMismatch {
                expected: source.len(),
                found: partition.len(),
            });
        }
        let clusters = partition.clusters().into_iter().filter(|c| !c.is_empty()).collect();
        Ok(LocalHullModel {
            source,
            partition,
            kind,
            clusters,
        })
    }

    /// One hull over the whole set.
    pub fn single(source: PointSet, kind: HullKind) -> Self {
        let n = source.len();
        LocalHullModel::new(source, Partition::single(n), kind).expect("single partition matches")
    }

    /// Clusters `source` according to `spec`.
    pub fn build(source: PointSet, spec: &ClusterSpec, kind: HullKind) -> Result<Self> {
        let partition = match spec {
            ClusterSpec::Adaptive(cfg) => adaptive_split(&source, cfg)?,
            ClusterSpec::Fixed { k, method, mmc, seed } => {
                fixed_split(&source, (*k).min(source.len()), *method, mmc, *seed)?
            }
        };
        LocalHullModel::new(source, partition, kind)
    }

    pub fn source(&self) -> &PointSet {
        &self.source
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn kind(&self) -> HullKind {
        self.kind
    }

    /// Vertex indices of each hull, in ascending cluster-label order.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn hull(&self, i: usize) -> Hull<'_> {
        Hull::new(&self.source, self.clusters[i].clone(), self.kind).expect("clusters are valid vertex sets")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDistance {
    pub value: f64,
    /// (query cluster, gallery cluster) attaining `value`.
    pub best_pair: (usize, usize),
    /// Every hull distance behind `value` met the solver tolerance.
    pub converged: bool,
    /// `per_pair[i][j]` for query cluster `i` and gallery cluster `j`; `None`
    /// entries are pairs that were not compared.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_pair: Option<Vec<Vec<Option<f64>>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub assignment: Option<ArcAssignment>,
}

impl SetDistance {
    fn scalar(value: f64, converged: bool) -> Self {
        SetDistance {
            value,
            best_pair: (0, 0),
            converged,
            per_pair: None,
            assignment: None,
        }
    }
}

/// Distance between the hulls of the two whole sets.
pub fn single_hull_distance(
    sa: &PointSet,
    sb: &PointSet,
    kind: HullKind,
    solver: &SolverConfig,
) -> Result<SetDistance> {
    let r = hull_distance(&Hull::whole(sa, kind), &Hull::whole(sb, kind), solver)?;
    Ok(SetDistance::scalar(r.distance, r.converged))
}

/// Minimum over all local hull pairs.
pub fn ccp_distance(ma: &LocalHullModel, mb: &LocalHullModel, solver: &SolverConfig) -> Result<SetDistance> {
    if ma.kind != mb.kind {
        return Err(Error::KindMismatch);
    }
    ma.source.check_dim(mb.source.dim())?;
    let pairs: Vec<(usize, usize)> = (0..ma.len()).flat_map(|i| (0..mb.len()).map(move |j| (i, j))).collect();
    let values = par::map(&pairs, |&(i, j)| hull_distance(&ma.hull(i), &mb.hull(j), solver));
    let mut per_pair = vec![vec![None; mb.len()]; ma.len()];
    let mut best = (f64::INFINITY, (0, 0));
    let mut converged = true;
    for (&(i, j), r) in pairs.iter().zip(values) {
        let r = r?;
        converged &= r.converged;
        let v = r.distance;
        per_pair[i][j] = Some(v);
        if v < best.0 {
            best = (v, (i, j));
        }
    }
    Ok(SetDistance {
        value: best.0,
        best_pair: best.1,
        converged,
        per_pair: Some(per_pair),
        assignment: None,
    })
}

/// Smallest distance between any sample of `sa` and any sample of `sb`.
pub fn nn_distance(sa: &PointSet, sb: &PointSet) -> Result<SetDistance> {
    sa.check_dim(sb.dim())?;
    let best = sa
        .points()
        .map(|a| sb.points().map(|b| dist_sq(a, b)).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    Ok(SetDistance::scalar(best.sqrt(), true))
}
