//! Thin SVD by one-sided Jacobi rotations.
//!
//! nalgebra 0.35's bidiagonal SVD returns inaccurate factors for some small
//! matrices with clustered singular values, which the affine solver builds
//! routinely (stacked orthonormal bases). One-sided Jacobi is slower but
//! accurate to a few ulps on the sizes used here.

use nalgebra::{DMatrix, DVector};

const MAX_SWEEPS: usize = 80;

/// `m = u · diag(s) · vᵀ` with `u: r×p`, `v: c×p`, `p = min(r, c)` and `s`
/// sorted in decreasing order. Singular vectors paired with a zero singular
/// value may be zero.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn svd(m: &DMatrix<f64>) -> Svd {
    if m.nrows() < m.ncols() {
        let t = svd(&m.transpose());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (r, c) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(c, c);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..c {
            for j in i + 1..c {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut a, i, j, cs, sn);
                rotate(&mut v, i, j, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..c).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    let p = r.min(c);
    let mut u = DMatrix::zeros(r, p);
    let mut vs = DMatrix::zeros(c, p);
    let mut s = DVector::zeros(p);
    for (k, &j) in order.iter().take(p).enumerate() {
        s[k] = norms[j];
        if norms[j] > 0.0 {
            u.set_column(k, &(a.column(j) / norms[j]));
        }
        vs.set_column(k, &v.column(j));
    }
    Svd { u, s, v: vs }
}

fn rotate(m: &mut DMatrix<f64>, i: usize, j: usize, cs: f64, sn: f64) {
    for row in 0..m.nrows() {
        let (x, y) = (m[(row, i)], m[(row, j)]);
        m[(row, i)] = cs * x - sn * y;
        m[(row, j)] = sn * x + cs * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(m: &DMatrix<f64>) {
        let f = svd(m);
        let p = f.s.iter().filter(|&&s| s > 1e-12 * f.s[0]).count();
        let rebuilt = &f.u * DMatrix::from_diagonal(&f.s) * f.v.transpose();
        assert!((rebuilt - m).norm() <= 1e-13 * m.norm().max(1.0));
        for w in [&f.u, &f.v] {
            let w = w.columns(0, p);
            assert!((w.transpose() * w - DMatrix::identity(p, p)).norm() < 1e-12);
        }
        assert!(f.s.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn factors_random_and_stacked_orthonormal_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let d = rng.random_range(1..=10);
            let ka = rng.random_range(1..=d);
            let kb = rng.random_range(1..=d);
            let ua = svd(&DMatrix::from_fn(d, ka, |_, _| rng.random_range(-1.0..1.0))).u;
            let ub = svd(&DMatrix::from_fn(d, kb, |_, _| rng.random_range(-1.0..1.0))).u;
            let mut q = DMatrix::zeros(d, ka + kb);
            q.columns_mut(0, ka).copy_from(&ua);
            q.columns_mut(ka, kb).copy_from(&(-ub));
            check(&q);
            check(&q.transpose());
            let cols = rng.random_range(1..=16);
            check(&DMatrix::from_fn(d, cols, |_, _| rng.random_range(-1.0..1.0)));
        }
    }

    #[test]
    fn rank_deficient_input_has_zero_tail() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        let f = svd(&m);
        assert!(f.s[2] < 1e-14 * f.s[0]);
        check(&m);
        check(&DMatrix::zeros(2, 3));
    }
}
