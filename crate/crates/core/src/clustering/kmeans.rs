use rand::Rng;

use super::Partition;
use crate::error::{Error, Result};
use crate::geometry::{dist_sq, PointSet};
use crate::seed;

const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub partition: Partition,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid.
    pub objective: f64,
    pub iterations: usize,
    /// Assignments reached a fixpoint before the iteration cap. A converged
    /// run is a Lloyd local optimum, which need not be the global one.
    pub converged: bool,
}

/// Lloyd's algorithm with k-means++ seeding.
pub fn kmeans(points: &PointSet, k: usize, seed: u64) -> Result<Partition> {
    kmeans_detailed(points, k, seed).map(|r| r.partition)
}

pub fn kmeans_detailed(points: &PointSet, k: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::ClusterCountOutOfRange { k, n });
    }
    let mut centroids = seed_plus_plus(points, k, seed);
    let mut labels = vec![usize::MAX; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut next: Vec<usize> = points.points().map(|p| nearest(&centroids, p).0).collect();
        repair_empty(points, &mut next, &centroids, k);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
        centroids = means(points, &labels, k, &centroids);
    }
    let objective = points
        .points()
        .zip(&labels)
        .map(|(p, &l)| dist_sq(p, &centroids[l]))
        .sum();
    Ok(KMeansResult {
        partition: Partition { labels, k },
        centroids,
        objective,
        iterations,
        converged,
    })
}

fn nearest(centroids: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = dist_sq(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_plus_plus(points: &PointSet, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut rng = seed::rng(seed);
    let mut centroids = vec![points.point(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = points.points().map(|p| dist_sq(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points.point(pick).to_vec();
        for (i, p) in points.points().enumerate() {
            d2[i] = d2[i].min(dist_sq(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Gives each empty cluster the point lying farthest from its own centroid,
/// taken from a cluster that can spare one.
fn repair_empty(points: &PointSet, labels: &mut [usize], centroids: &[Vec<f64>], k: usize) {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] > 1 {
                let d = dist_sq(points.point(i), &centroids[l]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        if let Some(i) = far {
            sizes[labels[i]] -= 1;
            labels[i] = c;
            sizes[c] = 1;
        }
    }
}

fn means(points: &PointSet, labels: &[usize], k: usize, old: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = points.dim();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.points().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(c, (s, cnt))| {
            if cnt == 0 {
                old[c].clone()
            } else {
                s.into_iter().map(|x| x / cnt as f64).collect()
            }
        })
        .collect()
}
