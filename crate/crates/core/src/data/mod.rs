//! Datasets of labelled point sets: file IO, synthetic generation, noise
//! injection and feature standardisation.

mod io;
mod synth;

pub use io::{load_dataset, load_point_set, save_dataset, write_point_set, FORMAT_LINE};
pub use synth::{gen_synthetic, inject_noise, SynthConfig};

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sets: Vec<PointSet>,
    dim: usize,
    pub metadata: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(sets: Vec<PointSet>, metadata: BTreeMap<String, String>) -> Result<Self> {
        let Some(first) = sets.first() else {
            return Err(Error::EmptySet);
        };
        let dim = first.dim();
        let mut ids = HashSet::new();
        for s in &sets {
            s.check_dim(dim)?;
            if !ids.insert(s.id()) {
                return Err(Error::DuplicateId(s.id().to_string()));
            }
        }
        Ok(Dataset { sets, dim, metadata })
    }

    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    pub fn into_sets(self) -> Vec<PointSet> {
        self.sets
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&PointSet> {
        self.sets.iter().find(|s| s.id() == id)
    }

    /// Distinct labels in order of first appearance.
    pub fn labels(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.sets
            .iter()
            .filter_map(|s| s.label())
            .filter(|l| seen.insert(l.to_string()))
            .map(str::to_string)
            .collect()
    }

    /// Per-feature bounding box over every sample.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for s in &self.sets {
            for p in s.points() {
                for (j, &x) in p.iter().enumerate() {
                    lo[j] = lo[j].min(x);
                    hi[j] = hi[j].max(x);
                }
            }
        }
        (lo, hi)
    }

    /// Applies `f` to every set, keeping ids, labels and metadata.
    pub fn map_sets(&self, f: impl FnMut(&PointSet) -> Result<PointSet>) -> Result<Dataset> {
        let sets = self.sets.iter().map(f).collect::<Result<Vec<_>>>()?;
        Dataset::new(sets, self.metadata.clone())
    }
}

/// Per-feature affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; 0 for constant features.
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits on the union of all samples in `ds`.
    pub fn fit(ds: &Dataset) -> Self {
        let d = ds.dim();
        let mut n = 0usize;
        let mut mean = vec![0.0; d];
        for s in ds.sets() {
            for p in s.points() {
                n += 1;
                for (m, x) in mean.iter_mut().zip(p) {
                    *m += x;
                }
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for s in ds.sets() {
            for p in s.points() {
                for j in 0..d {
                    let c = p[j] - mean[j];
                    var[j] += c * c;
                }
            }
        }
        let std = var.into_iter().map(|v| (v / n as f64).sqrt()).collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, s: &PointSet) -> Result<PointSet> {
        let d = self.mean.len();
        s.check_dim(d)?;
        s.map_values(|j, x| {
            if self.std[j] > 0.0 {
                (x - self.mean[j]) / self.std[j]
            } else {
                0.0
            }
        })
    }
}

/// Standardises every feature over the union of all sets. The returned
/// transform can be reused on query sets.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, Standardizer)> {
    let t = Standardizer::fit(ds);
    let out = ds.map_sets(|s| t.apply(s))?;
    Ok((out, t))
}
