//! Linear soft-margin SVM trained by SMO on the dual, using the
//! maximal-violating-pair rule with second-order working-set selection.

use crate::error::{Error, Result};
use crate::geometry::{dot, PointSet};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    /// `½‖w‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b))`.
    pub objective: f64,
    /// `1/‖w‖`, or 0 when `w = 0`.
    pub margin: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }
}

pub(crate) struct Gram {
    k: Vec<f64>,
    n: usize,
}

impl Gram {
    pub(crate) fn new(points: &PointSet) -> Self {
        let n = points.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = dot(points.point(i), points.point(j));
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        Gram { k, n }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }
}

/// Trains on labels in `{−1, +1}`. Both classes must be present.
pub fn train_linear_svm(points: &PointSet, labels: &[i8], c: f64, tolerance: f64) -> Result<SvmModel> {
    if labels.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: labels.len(),
        });
    }
    if c.is_nan() || c <= 0.0 || tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidConfig(
            "svm penalty and tolerance must be positive".into(),
        ));
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::InvalidConfig("svm labels must be -1 or +1".into()));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::InvalidConfig("svm needs both classes".into()));
    }
    Ok(train(points, &Gram::new(points), labels, c, tolerance))
}

pub(crate) fn train(points: &PointSet, gram: &Gram, y: &[i8], c: f64, tol: f64) -> SvmModel {
    let n = points.len();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let mut alpha = vec![0.0; n];
    // Gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij.
    let mut grad = vec![-1.0; n];
    let max_iter = (1000 * n).max(100_000);
    for _ in 0..max_iter {
        let up = |t: usize| (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
        let low = |t: usize| (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c);
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if up(t) && -yf[t] * grad[t] > g_max {
                g_max = -yf[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(t) {
                continue;
            }
            let v = -yf[t] * grad[t];
            g_min = g_min.min(v);
            let diff = g_max - v;
            if diff > 0.0 {
                let mut a = gram.at(i, i) + gram.at(t, t) - 2.0 * gram.at(i, t);
                if a <= 0.0 {
                    a = TAU;
                }
                let score = -diff * diff / a;
                if score < best {
                    best = score;
                    j = t;
                }
            }
        }
        if g_max - g_min < tol || j == usize::MAX {
            break;
        }
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = gram.at(i, i) + gram.at(j, j) - 2.0 * gram.at(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += yf[t] * (yf[i] * gram.at(t, i) * di + yf[j] * gram.at(t, j) * dj);
        }
    }

    let d = points.dim();
    let mut w = vec![0.0; d];
    for (t, p) in points.points().enumerate() {
        if alpha[t] != 0.0 {
            let s = alpha[t] * yf[t];
            for (wc, x) in w.iter_mut().zip(p) {
                *wc += s * x;
            }
        }
    }
    let b_dual = dual_offset(&alpha, &grad, y, c);
    let f: Vec<f64> = points.points().map(|p| dot(&w, p)).collect();
    let b = best_offset(&f, y, b_dual);
    model(w, b, &f, y, c)
}

/// Offset from the KKT conditions: the mean over free vectors, or the middle
/// of the feasible interval when none is free.
fn dual_offset(alpha: &[f64], grad: &[f64], y: &[i8], c: f64) -> f64 {
    let mut sum = 0.0;
    let mut free = 0;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..alpha.len() {
        let yg = y[t] as f64 * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            sum += yg;
            free += 1;
        } else {
            let at_upper = alpha[t] >= c;
            if (at_upper && y[t] == -1) || (!at_upper && y[t] == 1) {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        }
    }
    let rho = if free > 0 {
        sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };
    -rho
}

/// For fixed `w`, the hinge sum is piecewise linear in `b`. Returns `hint`
/// clamped to the interval of minimisers.
pub(crate) fn best_offset(f: &[f64], y: &[i8], hint: f64) -> f64 {
    let mut bp: Vec<f64> = f.iter().zip(y).map(|(&fi, &yi)| yi as f64 - fi).collect();
    bp.sort_by(f64::total_cmp);
    let pos = y.iter().filter(|&&v| v == 1).count();
    // Slope starts at −pos and rises by one at each breakpoint.
    let lo = if pos == 0 { f64::NEG_INFINITY } else { bp[pos - 1] };
    let hi = if pos == bp.len() { f64::INFINITY } else { bp[pos] };
    let hint = if hint.is_finite() { hint } else { 0.0 };
    hint.clamp(lo, hi)
}

pub(crate) fn objective(w: &[f64], b: f64, f: &[f64], y: &[i8], c: f64) -> f64 {
    let hinge: f64 = f
        .iter()
        .zip(y)
        .map(|(&fi, &yi)| (1.0 - yi as f64 * (fi + b)).max(0.0))
        .sum();
    0.5 * dot(w, w) + c * hinge
}

pub(crate) fn model(w: Vec<f64>, b: f64, f: &[f64], y: &[i8], c: f64) -> SvmModel {
    let objective = objective(&w, b, f, y, c);
    let norm = dot(&w, &w).sqrt();
    let margin = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    SvmModel {
        w,
        b,
        objective,
        margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: Vec<Vec<f64>>) -> PointSet {
        PointSet::new("s", None, rows).unwrap()
    }

    #[test]
    fn hard_margin_on_separated_line() {
        // Support vectors at ±1: w = 1, b = 0, margin 1 (no slack for C large).
        let pts = set(vec![vec![-3.0], vec![-1.0], vec![1.0], vec![3.0]]);
        let m = train_linear_svm(&pts, &[-1, -1, 1, 1], 10.0, 1e-10).unwrap();
        assert!((m.w[0] - 1.0).abs() < 1e-8, "{m:?}");
        assert!(m.b.abs() < 1e-8);
        assert!((m.margin - 1.0).abs() < 1e-8);
        assert!((m.objective - 0.5).abs() < 1e-8);
    }

    #[test]
    fn soft_margin_objective_matches_closed_form() {
        // With b = 0 the primal is ½w² + 4C·(1 − w/2) for w ≤ 2, minimised
        // at w = 2C.
        let pts = set(vec![vec![-0.5], vec![-0.5], vec![0.5], vec![0.5]]);
        let c = 0.25;
        let m = train_linear_svm(&pts, &[-1, -1, 1, 1], c, 1e-12).unwrap();
        assert!((m.w[0] - 0.5).abs() < 1e-8, "{m:?}");
        let want = 0.5 * 0.25 + 4.0 * c * (1.0 - 0.25);
        assert!((m.objective - want).abs() < 1e-8);
    }

    #[test]
    fn offset_interval() {
        // f = 0 for all, two positives one negative: breakpoints 1,1,−1.
        let b = best_offset(&[0.0, 0.0, 0.0], &[1, 1, -1], 5.0);
        assert_eq!(b, 1.0);
    }

    #[test]
    fn rejects_single_class() {
        let pts = set(vec![vec![0.0], vec![1.0]]);
        assert!(train_linear_svm(&pts, &[1, 1], 1.0, 1e-6).is_err());
    }
}
