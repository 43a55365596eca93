use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist_sq, PointSet};
use crate::par;

/// Average minimal middle-point distance of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmmdReport {
    /// Distance from each point's middle point to the nearest sample.
    pub deltas: Vec<f64>,
    /// Mean of `deltas`.
    pub ammd: f64,
    /// Furthest sample of each point (lowest index on ties).
    pub furthest_index: Vec<usize>,
}

/// For every point, takes the midpoint towards its furthest sample and
/// measures how far that midpoint is from the nearest sample. The mean of
/// those distances is large when the hull contains wide empty regions.
///
/// A singleton set has no middle points; its AMMD is 0.
pub fn ammd(points: &PointSet) -> Result<AmmdReport> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    if n == 1 {
        return Ok(AmmdReport {
            deltas: vec![0.0],
            ammd: 0.0,
            furthest_index: vec![0],
        });
    }
    let d = points.dim();
    let per_point = par::map_range(n, |i| {
        let xi = points.point(i);
        let mut far = 0;
        let mut far_d = -1.0;
        for j in 0..n {
            let dj = dist_sq(xi, points.point(j));
            if dj > far_d {
                far_d = dj;
                far = j;
            }
        }
        let xj = points.point(far);
        let mid: Vec<f64> = (0..d).map(|c| 0.5 * xi[c] + 0.5 * xj[c]).collect();
        let near = points.points().map(|p| dist_sq(&mid, p)).fold(f64::INFINITY, f64::min);
        (near.sqrt(), far)
    });
    let deltas: Vec<f64> = per_point.iter().map(|p| p.0).collect();
    let furthest_index = per_point.iter().map(|p| p.1).collect();
    let ammd = deltas.iter().sum::<f64>() / n as f64;
    Ok(AmmdReport {
        deltas,
        ammd,
        furthest_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: Vec<Vec<f64>>) -> PointSet {
        PointSet::new("s", None, rows).unwrap()
    }

    #[test]
    fn symmetric_pair() {
        let r = ammd(&set(vec![vec![0.0, 0.0], vec![2.0, 0.0]])).unwrap();
        assert_eq!(r.deltas, vec![1.0, 1.0]);
        assert_eq!(r.ammd, 1.0);
        assert_eq!(r.furthest_index, vec![1, 0]);
    }

    #[test]
    fn singleton_is_zero() {
        assert_eq!(ammd(&set(vec![vec![5.0, 5.0]])).unwrap().ammd, 0.0);
    }

    #[test]
    fn collinear_triple_tie_goes_to_lowest_index() {
        let r = ammd(&set(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]])).unwrap();
        assert_eq!(r.furthest_index, vec![2, 0, 0]);
        assert_eq!(r.deltas, vec![0.0, 0.5, 0.0]);
        assert!((r.ammd - 1.0 / 6.0).abs() < 1e-15);
    }
}
