use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{arc_distance, ccp_distance, nn_distance, single_hull_distance, LocalHullModel, SetDistance};
use crate::clustering::{MmcConfig, SplitConfig, SplitMethod};
use crate::error::{Error, Result};
use crate::geometry::{HullKind, PointSet, SolverConfig};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Single,
    Ccp,
    Arc,
    Nn,
}

impl Comparison {
    pub const ALL: [Comparison; 4] = [Comparison::Single, Comparison::Ccp, Comparison::Arc, Comparison::Nn];
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Single => "single",
            Comparison::Ccp => "ccp",
            Comparison::Arc => "arc",
            Comparison::Nn => "nn",
        })
    }
}

impl FromStr for Comparison {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Comparison::Single),
            "ccp" => Ok(Comparison::Ccp),
            "arc" => Ok(Comparison::Arc),
            "nn" => Ok(Comparison::Nn),
            other => Err(Error::InvalidConfig(format!("unknown comparison {other:?}"))),
        }
    }
}

/// How local hulls are extracted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSpec {
    /// Cluster count driven by the AMMD threshold.
    Adaptive(SplitConfig),
    /// Exactly `k` clusters (fewer if the set is smaller).
    Fixed {
        k: usize,
        method: SplitMethod,
        mmc: MmcConfig,
        seed: u64,
    },
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec::Adaptive(SplitConfig::default())
    }
}

impl ClusterSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClusterSpec::Adaptive(cfg) => cfg.validate(),
            ClusterSpec::Fixed { k, mmc, .. } => {
                if *k == 0 {
                    return Err(Error::InvalidConfig("cluster count must be at least 1".into()));
                }
                mmc.validate()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub kind: HullKind,
    pub comparison: Comparison,
    pub clustering: ClusterSpec,
    pub solver: SolverConfig,
    pub top_m_rule: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            kind: HullKind::Convex,
            comparison: Comparison::Arc,
            clustering: ClusterSpec::default(),
            solver: SolverConfig::default(),
            top_m_rule: true,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.clustering.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub id: String,
    pub label: String,
    pub distance: SetDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub query_id: String,
    pub per_gallery: Vec<GalleryEntry>,
    pub predicted_label: String,
    pub distance: f64,
    /// Gap between the closest gallery set of another class and the closest
    /// overall. `None` when the gallery holds a single class.
    pub margin_to_runner_up: Option<f64>,
    /// Every comparison met the solver tolerance.
    pub converged: bool,
}

/// Labelled gallery sets, with local hull models cached for CCP.
#[derive(Debug, Clone)]
pub struct Gallery {
    sets: Vec<PointSet>,
    models: Option<(ClusterSpec, HullKind, Vec<LocalHullModel>)>,
}

impl Gallery {
    pub fn new(sets: Vec<PointSet>) -> Result<Self> {
        let Some(first) = sets.first() else {
            return Err(Error::InvalidConfig("gallery is empty".into()));
        };
        let d = first.dim();
        let mut ids = HashSet::new();
        for s in &sets {
            s.check_dim(d)?;
            if s.label().is_none() {
                return Err(Error::InvalidConfig(format!("gallery set {:?} has no label", s.id())));
            }
            if !ids.insert(s.id().to_string()) {
                return Err(Error::DuplicateId(s.id().to_string()));
            }
        }
        Ok(Gallery { sets, models: None })
    }

    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    /// Clusters the gallery sets when `cfg` compares local hulls pairwise.
    pub fn prepare(&mut self, cfg: &MatchConfig) -> Result<()> {
        cfg.validate()?;
        if cfg.comparison != Comparison::Ccp || self.prepared_for(cfg) {
            return Ok(());
        }
        let models = par::map(&self.sets, |s| {
            LocalHullModel::build(s.clone(), &cfg.clustering, cfg.kind)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        self.models = Some((cfg.clustering.clone(), cfg.kind, models));
        Ok(())
    }

    fn prepared_for(&self, cfg: &MatchConfig) -> bool {
        matches!(&self.models, Some((spec, kind, _)) if *spec == cfg.clustering && *kind == cfg.kind)
    }

    /// Distances from `query` to every gallery set and the label of the
    /// closest one (first in gallery order on ties). For ARC the query is
    /// clustered once and serves as the reference for every gallery set.
    pub fn classify(&self, query: &PointSet, cfg: &MatchConfig) -> Result<MatchResult> {
        cfg.validate()?;
        query.check_dim(self.sets[0].dim())?;
        let distances: Vec<Result<SetDistance>> = match cfg.comparison {
            Comparison::Single => par::map(&self.sets, |g| single_hull_distance(query, g, cfg.kind, &cfg.solver)),
            Comparison::Nn => par::map(&self.sets, |g| nn_distance(query, g)),
            Comparison::Arc => {
                let reference = LocalHullModel::build(query.clone(), &cfg.clustering, cfg.kind)?;
                par::map(&self.sets, |g| arc_distance(&reference, g, &cfg.solver, cfg.top_m_rule))
            }
            Comparison::Ccp => {
                let qm = LocalHullModel::build(query.clone(), &cfg.clustering, cfg.kind)?;
                if self.prepared_for(cfg) {
                    let models = &self.models.as_ref().expect("prepared").2;
                    par::map(models, |gm| ccp_distance(&qm, gm, &cfg.solver))
                } else {
                    par::map(&self.sets, |g| {
                        let gm = LocalHullModel::build(g.clone(), &cfg.clustering, cfg.kind)?;
                        ccp_distance(&qm, &gm, &cfg.solver)
                    })
                }
            }
        };
        let mut per_gallery = Vec::with_capacity(self.sets.len());
        for (g, d) in self.sets.iter().zip(distances) {
            per_gallery.push(GalleryEntry {
                id: g.id().to_string(),
                label: g.label().expect("checked in new").to_string(),
                distance: d?,
            });
        }
        let mut best = 0;
        for (i, e) in per_gallery.iter().enumerate() {
            if e.distance.value < per_gallery[best].distance.value {
                best = i;
            }
        }
        let predicted_label = per_gallery[best].label.clone();
        let distance = per_gallery[best].distance.value;
        let margin_to_runner_up = per_gallery
            .iter()
            .filter(|e| e.label != predicted_label)
            .map(|e| e.distance.value)
            .reduce(f64::min)
            .map(|d| d - distance);
        let converged = per_gallery.iter().all(|e| e.distance.converged);
        Ok(MatchResult {
            query_id: query.id().to_string(),
            per_gallery,
            predicted_label,
            distance,
            margin_to_runner_up,
            converged,
        })
    }
}

/// One-off classification against `gallery`.
pub fn classify(query: &PointSet, gallery: &[PointSet], cfg: &MatchConfig) -> Result<MatchResult> {
    let mut g = Gallery::new(gallery.to_vec())?;
    g.prepare(cfg)?;
    g.classify(query, cfg)
}
