use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::Partition;
use crate::error::{Error, Result};
use crate::geometry::{point_to_hull_distance, Hull, HullKind, PointSet, SolverConfig};
use crate::{par, seed};

/// Membership threshold on the point-to-hull distance.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyRegionReport {
    /// Share of the bounding box inside the full hull but outside the hull
    /// of the clean points.
    pub before_fraction: f64,
    /// Share inside the local hull holding the noisy point but outside the
    /// hull of the clean points.
    pub after_fraction: f64,
    pub samples: usize,
    /// Larger of the two 95% normal-approximation halfwidths.
    pub confidence_halfwidth: f64,
    pub box_volume: f64,
}

impl NoisyRegionReport {
    /// After-fraction below before-fraction by more than both halfwidths.
    pub fn strictly_reduced(&self) -> bool {
        self.after_fraction + 2.0 * self.confidence_halfwidth < self.before_fraction
    }
}

fn halfwidth(p: f64, n: usize) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Monte-Carlo estimate of how much of the bounding box only the noisy point
/// can reach, before and after local hull extraction.
pub fn noisy_region_estimate(
    points: &PointSet,
    noisy_index: usize,
    partition: &Partition,
    samples: usize,
    seed: u64,
) -> Result<NoisyRegionReport> {
    let d = points.dim();
    if d > 3 {
        return Err(Error::DimensionTooHigh(d));
    }
    let n = points.len();
    if noisy_index >= n {
        return Err(Error::IndexOutOfRange {
            index: noisy_index,
            len: n,
        });
    }
    if partition.len() != n {
        return Err(Error::InvalidConfig(format!(
            "partition covers {} points, set has {n}",
            partition.len()
        )));
    }
    if samples < 1000 {
        return Err(Error::InvalidConfig("probe needs at least 1000 samples".into()));
    }
    if n < 2 {
        return Err(Error::InvalidConfig("probe needs at least two points".into()));
    }

    let solver = SolverConfig::default();
    let full = Hull::whole(points, HullKind::Convex);
    let clean = Hull::new(points, (0..n).filter(|&i| i != noisy_index).collect(), HullKind::Convex)?;
    let own = partition.labels()[noisy_index];
    let local_vertices: Vec<usize> = (0..n).filter(|&i| partition.labels()[i] == own).collect();
    let local = Hull::new(points, local_vertices, HullKind::Convex)?;

    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points.points() {
        for j in 0..d {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let inside = |x: &[f64], h: &Hull| -> Result<bool> {
        Ok(point_to_hull_distance(x, h, &solver)?.distance <= MEMBERSHIP_TOLERANCE)
    };

    let chunks = samples.div_ceil(CHUNK);
    let counts = par::map_range(chunks, |c| -> Result<(usize, usize)> {
        let mut rng = seed::rng(seed::derive(seed, c as u64));
        let m = CHUNK.min(samples - c * CHUNK);
        let mut x = vec![0.0; d];
        let (mut before, mut after) = (0, 0);
        for _ in 0..m {
            for j in 0..d {
                x[j] = if hi[j] > lo[j] {
                    rng.random_range(lo[j]..hi[j])
                } else {
                    lo[j]
                };
            }
            // The local hull lies inside the full hull, so outside the full
            // hull settles both tests.
            if inside(&x, &clean)? || !inside(&x, &full)? {
                continue;
            }
            before += 1;
            if inside(&x, &local)? {
                after += 1;
            }
        }
        Ok((before, after))
    });
    let (mut before, mut after) = (0, 0);
    for c in counts {
        let (b, a) = c?;
        before += b;
        after += a;
    }
    let before_fraction = before as f64 / samples as f64;
    let after_fraction = after as f64 / samples as f64;
    Ok(NoisyRegionReport {
        before_fraction,
        after_fraction,
        samples,
        confidence_halfwidth: halfwidth(before_fraction, samples).max(halfwidth(after_fraction, samples)),
        box_volume: lo.iter().zip(&hi).map(|(l, h)| h - l).product(),
    })
}
