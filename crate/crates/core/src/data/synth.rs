use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::seed;

/// Modes per class that sets draw their intra-set modes from.
const CLASS_MODES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_classes: usize,
    pub sets_per_class: usize,
    pub points_per_set: usize,
    pub dimension: usize,
    /// Side of the box class centres are drawn from.
    pub class_center_spread: f64,
    /// Scale of the per-set condition shift and of the mode displacements.
    pub condition_offset_scale: f64,
    pub cluster_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_classes: 10,
            sets_per_class: 3,
            points_per_set: 50,
            dimension: 16,
            class_center_spread: 20.0,
            condition_offset_scale: 1.0,
            cluster_sigma: 1.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.sets_per_class == 0 || self.points_per_set == 0 || self.dimension == 0 {
            return Err(Error::InvalidConfig("synthetic counts must be at least 1".into()));
        }
        for (name, v) in [
            ("class_center_spread", self.class_center_spread),
            ("condition_offset_scale", self.condition_offset_scale),
            ("cluster_sigma", self.cluster_sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Class centres uniform in a box; every class owns a few mode
/// displacements, and each set mixes 2 to 4 of them around its own shifted
/// centre, so sets of one class share some appearance modes but not all.
pub fn gen_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let d = cfg.dimension;
    let mut rng = seed::rng(cfg.seed);
    let offset = Normal::new(0.0, cfg.condition_offset_scale).expect("validated scale");
    let noise = Normal::new(0.0, cfg.cluster_sigma).expect("validated sigma");
    let mut sets = Vec::with_capacity(cfg.num_classes * cfg.sets_per_class);
    for c in 0..cfg.num_classes {
        let center: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * cfg.class_center_spread).collect();
        let modes: Vec<Vec<f64>> = (0..CLASS_MODES)
            .map(|_| (0..d).map(|_| offset.sample(&mut rng)).collect())
            .collect();
        for s in 0..cfg.sets_per_class {
            let shift: Vec<f64> = (0..d).map(|_| offset.sample(&mut rng)).collect();
            let count = rng.random_range(2..=CLASS_MODES);
            let chosen = sample(&mut rng, CLASS_MODES, count).into_vec();
            let mut data = Vec::with_capacity(cfg.points_per_set * d);
            for _ in 0..cfg.points_per_set {
                let m = &modes[chosen[rng.random_range(0..count)]];
                for j in 0..d {
                    data.push(center[j] + shift[j] + m[j] + noise.sample(&mut rng));
                }
            }
            let label = format!("c{c:02}");
            sets.push(PointSet::from_flat(format!("{label}_s{s:02}"), Some(label), d, data)?);
        }
    }
    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert("generator".into(), "synthetic".into());
    metadata.insert("seed".into(), cfg.seed.to_string());
    Dataset::new(sets, metadata)
}

/// Replaces `⌊fraction·n⌋` samples of every set with uniform draws from the
/// dataset's bounding box widened by half its extent (a quarter on each
/// side).
pub fn inject_noise(ds: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidConfig("noise fraction must lie in [0, 1]".into()));
    }
    let (lo, hi) = ds.bounds();
    let (lo, hi): (Vec<f64>, Vec<f64>) = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| {
            let w = if h > l { h - l } else { 1.0 };
            (l - 0.25 * w, h + 0.25 * w)
        })
        .unzip();
    let d = ds.dim();
    let mut index = 0u64;
    let out = ds.map_sets(|s| {
        let mut rng = seed::rng(seed::derive(seed, index));
        index += 1;
        let n = s.len();
        let k = (fraction * n as f64).floor() as usize;
        let mut data = s.as_flat().to_vec();
        for i in sample(&mut rng, n, k).into_vec() {
            for j in 0..d {
                data[i * d + j] = rng.random_range(lo[j]..=hi[j]);
            }
        }
        PointSet::from_flat(s.id(), s.label().map(str::to_string), d, data)
    })?;
    let mut out = out;
    out.metadata.insert("noise_fraction".into(), fraction.to_string());
    out.metadata.insert("noise_seed".into(), seed.to_string());
    Ok(out)
}
