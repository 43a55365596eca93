//! Closed-form distance between affine hulls.
//!
//! Each hull is written as `p_0 + span{p_i - p_0}`. The two spans are
//! orthonormalised with a truncated SVD, and one least-squares problem in the
//! combined basis gives the nearest points. Weights are mapped back onto the
//! original vertices so the result carries an affine-combination certificate.

use nalgebra::{DMatrix, DVector};

use super::linalg::svd;

struct Span {
    /// Orthonormal basis, `d × r`.
    basis: DMatrix<f64>,
    /// Maps basis coordinates back to direction coefficients, `(k-1) × r`.
    back: DMatrix<f64>,
}

fn span(pts: &[&[f64]], rank_eps: f64) -> Span {
    let d = pts[0].len();
    let k = pts.len();
    if k == 1 {
        return Span {
            basis: DMatrix::zeros(d, 0),
            back: DMatrix::zeros(0, 0),
        };
    }
    let dirs = DMatrix::from_fn(d, k - 1, |r, c| pts[c + 1][r] - pts[0][r]);
    let f = svd(&dirs);
    let sigma_max = f.s.iter().copied().fold(0.0, f64::max);
    let rank =
        f.s.iter()
            .filter(|&&s| sigma_max > 0.0 && s > rank_eps * sigma_max)
            .count();
    let basis = f.u.columns(0, rank).into_owned();
    let back = DMatrix::from_fn(k - 1, rank, |r, c| f.v[(r, c)] / f.s[c]);
    Span { basis, back }
}

/// Minimum-norm least-squares solution of `m x ≈ rhs`, truncating singular
/// values below `rank_eps · σ_max`.
pub(crate) fn lstsq(m: DMatrix<f64>, rhs: DVector<f64>, rank_eps: f64) -> DVector<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DVector::zeros(0);
    }
    let f = svd(&m);
    let sigma_max = f.s.iter().copied().fold(0.0, f64::max);
    let mut x = DVector::zeros(cols);
    if sigma_max == 0.0 {
        return x;
    }
    for (i, &s) in f.s.iter().enumerate() {
        if s > rank_eps * sigma_max {
            x += f.v.column(i) * (f.u.column(i).dot(&rhs) / s);
        }
    }
    x
}

fn weights(back: &DMatrix<f64>, coords: DVector<f64>, k: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(k);
    if k == 1 {
        w.push(1.0);
        return w;
    }
    let c = back * coords;
    w.push(1.0 - c.iter().sum::<f64>());
    w.extend(c.iter().copied());
    w
}

/// Affine weights for the nearest points of `aff(a)` and `aff(b)`.
pub(crate) fn solve(a: &[&[f64]], b: &[&[f64]], rank_eps: f64) -> (Vec<f64>, Vec<f64>) {
    let d = a[0].len();
    let sa = span(a, rank_eps);
    let sb = span(b, rank_eps);
    let ra = sa.basis.ncols();
    let rb = sb.basis.ncols();
    if ra + rb == 0 {
        return (vec![1.0], vec![1.0]);
    }
    let mut q = DMatrix::zeros(d, ra + rb);
    q.columns_mut(0, ra).copy_from(&sa.basis);
    q.columns_mut(ra, rb).copy_from(&(-&sb.basis));
    // min || (a0 - b0) + Q t ||
    let rhs = DVector::from_iterator(d, a[0].iter().zip(b[0]).map(|(x, y)| y - x));
    let t = lstsq(q, rhs, rank_eps);
    let alpha = DVector::from_iterator(ra, t.iter().take(ra).copied());
    let beta = DVector::from_iterator(rb, t.iter().skip(ra).copied());
    (weights(&sa.back, alpha, a.len()), weights(&sb.back, beta, b.len()))
}
