//! Nearest points between two convex hulls.
//!
//! Both solvers work on the joint problem
//!
//! ```text
//!   min ||A w - B v||²   s.t.  w ∈ Δ_m, v ∈ Δ_n
//! ```
//!
//! i.e. the minimum-norm point of the Minkowski difference `conv(A) - conv(B)`,
//! whose vertices are the pairs `a_i - b_j`. The linear minimisation oracle over
//! that difference never enumerates the `m·n` pairs: it is `argmin_i <x, a_i>`
//! combined with `argmax_j <x, b_j>`, so each iteration costs `O((m + n)·d)`.
//!
//! Both stop on the Frank–Wolfe duality gap `<x, x - s>` where `s` is the
//! oracle vertex, compared against `tolerance · scale²`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{affine, dot, SolverConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexSolver {
    /// Fully-corrective Frank–Wolfe: keeps a corral of affinely independent
    /// difference vertices and re-solves exactly over it after every oracle
    /// call (Wolfe's minimum-norm-point scheme). Terminates finitely.
    #[default]
    MinNorm,
    /// Pairwise Frank–Wolfe with exact line search, moving mass between one
    /// oracle vertex and one away vertex per block, finished by an exact
    /// solve over the active set.
    PairwiseFrankWolfe,
}

pub(crate) struct RawSolution {
    pub weights_a: Vec<f64>,
    pub weights_b: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const POSITIVE: f64 = 1e-12;

pub(crate) fn solve(a: &[&[f64]], b: &[&[f64]], cfg: &SolverConfig) -> RawSolution {
    match cfg.convex_solver {
        ConvexSolver::MinNorm => min_norm(a, b, cfg),
        ConvexSolver::PairwiseFrankWolfe => pairwise(a, b, cfg),
    }
}

/// Starting pair: the vertex of A nearest B's centroid, then the vertex of B
/// nearest that. For a single-point B this is the nearest vertex of A.
fn initial_pair(a: &[&[f64]], b: &[&[f64]]) -> (usize, usize) {
    let d = a[0].len();
    let mut centroid = vec![0.0; d];
    for p in b {
        for (c, &x) in centroid.iter_mut().zip(p.iter()) {
            *c += x;
        }
    }
    let inv = 1.0 / b.len() as f64;
    centroid.iter_mut().for_each(|c| *c *= inv);
    let i0 = argmin_by(a.len(), |i| super::dist_sq(a[i], &centroid));
    let j0 = argmin_by(b.len(), |j| super::dist_sq(b[j], a[i0]));
    (i0, j0)
}

fn argmin_by(n: usize, f: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_v = f(0);
    for i in 1..n {
        let v = f(i);
        if v < best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

struct Oracle {
    i: usize,
    j: usize,
    /// `<x, a_i - b_j>`
    value: f64,
}

fn oracle(x: &[f64], a: &[&[f64]], b: &[&[f64]], ga: &mut [f64], gb: &mut [f64]) -> Oracle {
    for (g, p) in ga.iter_mut().zip(a) {
        *g = dot(x, p);
    }
    for (g, p) in gb.iter_mut().zip(b) {
        *g = dot(x, p);
    }
    let i = argmin_by(a.len(), |i| ga[i]);
    let j = argmin_by(b.len(), |j| -gb[j]);
    Oracle {
        i,
        j,
        value: ga[i] - gb[j],
    }
}

fn diff(p: &[f64], q: &[f64]) -> Vec<f64> {
    p.iter().zip(q).map(|(x, y)| x - y).collect()
}

fn sq(x: &[f64]) -> f64 {
    dot(x, x)
}

fn min_norm(a: &[&[f64]], b: &[&[f64]], cfg: &SolverConfig) -> RawSolution {
    let d = a[0].len();
    let cap = cfg.iteration_cap(a.len(), b.len(), d);
    let (i0, j0) = initial_pair(a, b);

    let mut corral: Vec<(usize, usize)> = vec![(i0, j0)];
    let mut pts: Vec<Vec<f64>> = vec![diff(a[i0], b[j0])];
    let mut lambda = vec![1.0];
    let mut x = pts[0].clone();
    let mut ga = vec![0.0; a.len()];
    let mut gb = vec![0.0; b.len()];

    let mut iterations = 0;
    let mut converged = false;
    let mut prev_norm = f64::INFINITY;

    'major: loop {
        iterations += 1;
        let o = oracle(&x, a, b, &mut ga, &mut gb);
        let xsq = sq(&x);
        let s_norm = sq(&diff(a[o.i], b[o.j]));
        let scale2 = pts.iter().map(|p| sq(p)).fold(s_norm, f64::max).max(f64::MIN_POSITIVE);
        let gap = xsq - o.value;
        if gap <= cfg.tolerance * scale2 {
            converged = true;
            break;
        }
        // No strict decrease or a repeated vertex: numerically stalled.
        if corral.contains(&(o.i, o.j)) || xsq >= prev_norm || iterations >= cap {
            break;
        }
        prev_norm = xsq;
        corral.push((o.i, o.j));
        pts.push(diff(a[o.i], b[o.j]));
        lambda.push(0.0);

        loop {
            let mu = affine_min_norm(&pts, cfg.rank_epsilon);
            if mu.iter().all(|&m| m > POSITIVE) {
                lambda = mu;
                break;
            }
            // Step from lambda towards mu until the first coordinate hits zero.
            let mut theta = 1.0;
            let mut leaving = 0;
            for k in 0..mu.len() {
                if mu[k] <= POSITIVE {
                    let denom = lambda[k] - mu[k];
                    let t = if denom > 0.0 { lambda[k] / denom } else { 0.0 };
                    if t < theta {
                        theta = t;
                        leaving = k;
                    }
                }
            }
            for k in 0..lambda.len() {
                lambda[k] = (1.0 - theta) * lambda[k] + theta * mu[k];
            }
            lambda[leaving] = 0.0;
            let mut k = 0;
            while k < lambda.len() {
                if lambda[k] <= POSITIVE && lambda.len() > 1 {
                    lambda.remove(k);
                    pts.remove(k);
                    corral.remove(k);
                } else {
                    k += 1;
                }
            }
            iterations += 1;
            if iterations >= cap {
                normalise(&mut lambda);
                break 'major;
            }
        }
        normalise(&mut lambda);
        x = combine_owned(&pts, &lambda);
    }

    let mut wa = vec![0.0; a.len()];
    let mut wb = vec![0.0; b.len()];
    for (&(i, j), &l) in corral.iter().zip(&lambda) {
        wa[i] = (wa[i] + l).min(1.0);
        wb[j] = (wb[j] + l).min(1.0);
    }
    RawSolution {
        weights_a: wa,
        weights_b: wb,
        iterations,
        converged,
    }
}

fn normalise(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|v| *v /= s);
    }
}

fn combine_owned(pts: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pts[0].len()];
    for (p, &wi) in pts.iter().zip(w) {
        for (o, &v) in out.iter_mut().zip(p) {
            *o += wi * v;
        }
    }
    out
}

/// Coefficients (summing to one) of the minimum-norm point in the affine hull
/// of `pts`. Rank-deficient directions are dropped via a truncated SVD.
fn affine_min_norm(pts: &[Vec<f64>], rank_eps: f64) -> Vec<f64> {
    let k = pts.len();
    if k == 1 {
        return vec![1.0];
    }
    let d = pts[0].len();
    let base = &pts[0];
    let dirs = DMatrix::from_fn(d, k - 1, |r, c| pts[c + 1][r] - base[r]);
    let rhs = DVector::from_iterator(d, base.iter().map(|v| -v));
    let c = affine::lstsq(dirs, rhs, rank_eps);
    let mut mu = Vec::with_capacity(k);
    mu.push(1.0 - c.iter().sum::<f64>());
    mu.extend(c.iter().copied());
    mu
}

fn pairwise(a: &[&[f64]], b: &[&[f64]], cfg: &SolverConfig) -> RawSolution {
    let d = a[0].len();
    let cap = cfg.iteration_cap(a.len(), b.len(), d);
    let (i0, j0) = initial_pair(a, b);
    let mut wa = vec![0.0; a.len()];
    let mut wb = vec![0.0; b.len()];
    wa[i0] = 1.0;
    wb[j0] = 1.0;
    let mut z = diff(a[i0], b[j0]);
    let mut ga = vec![0.0; a.len()];
    let mut gb = vec![0.0; b.len()];
    let scale2 = {
        let ra = a.iter().map(|p| super::dist(p, a[0])).fold(0.0, f64::max);
        let rb = b.iter().map(|p| super::dist(p, a[0])).fold(0.0, f64::max);
        ((ra + rb) * (ra + rb)).max(sq(&z)).max(f64::MIN_POSITIVE)
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        iterations += 1;
        if iterations % 64 == 0 {
            // Re-anchor z to the weights to stop incremental drift.
            z = diff(&super::combine(a, &wa), &super::combine(b, &wb));
        }
        let o = oracle(&z, a, b, &mut ga, &mut gb);
        let za: f64 = wa.iter().zip(&ga).map(|(w, g)| w * g).sum();
        let zb: f64 = wb.iter().zip(&gb).map(|(w, g)| w * g).sum();
        let gap = (za - zb) - o.value;
        if gap <= cfg.tolerance * scale2 {
            converged = true;
            break;
        }
        let i_away = away(&wa, &ga, true);
        let j_away = away(&wb, &gb, false);
        let pa = ga[i_away] - ga[o.i];
        let pb = gb[o.j] - gb[j_away];
        if pa >= pb {
            let delta = diff(a[o.i], a[i_away]);
            let dd = sq(&delta);
            if dd == 0.0 {
                break;
            }
            let gamma = (pa / dd).min(wa[i_away]);
            wa[o.i] += gamma;
            wa[i_away] = if gamma == wa[i_away] { 0.0 } else { wa[i_away] - gamma };
            z.iter_mut().zip(&delta).for_each(|(zi, di)| *zi += gamma * di);
        } else {
            let delta = diff(b[j_away], b[o.j]);
            let dd = sq(&delta);
            if dd == 0.0 {
                break;
            }
            let gamma = (pb / dd).min(wb[j_away]);
            wb[o.j] += gamma;
            wb[j_away] = if gamma == wb[j_away] { 0.0 } else { wb[j_away] - gamma };
            z.iter_mut().zip(&delta).for_each(|(zi, di)| *zi += gamma * di);
        }
    }

    if let Some((pa, pb)) = polish(a, b, &wa, &wb, cfg.rank_epsilon) {
        wa = pa;
        wb = pb;
        let z = diff(&super::combine(a, &wa), &super::combine(b, &wb));
        let o = oracle(&z, a, b, &mut ga, &mut gb);
        converged = sq(&z) - o.value <= cfg.tolerance * scale2;
    }
    normalise(&mut wa);
    normalise(&mut wb);
    RawSolution {
        weights_a: wa,
        weights_b: wb,
        iterations,
        converged,
    }
}

fn away(w: &[f64], g: &[f64], largest: bool) -> usize {
    let mut best = usize::MAX;
    for (i, (&wi, &gi)) in w.iter().zip(g).enumerate() {
        if wi <= 0.0 {
            continue;
        }
        if best == usize::MAX || (largest && gi > g[best]) || (!largest && gi < g[best]) {
            best = i;
        }
    }
    best
}

/// Exact re-solve restricted to the active vertices. Accepted only when the
/// affine optimum stays inside both simplices and does not increase the
/// objective.
fn polish(a: &[&[f64]], b: &[&[f64]], wa: &[f64], wb: &[f64], rank_eps: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let act_a: Vec<usize> = (0..a.len()).filter(|&i| wa[i] > 0.0).collect();
    let act_b: Vec<usize> = (0..b.len()).filter(|&j| wb[j] > 0.0).collect();
    let sa: Vec<&[f64]> = act_a.iter().map(|&i| a[i]).collect();
    let sb: Vec<&[f64]> = act_b.iter().map(|&j| b[j]).collect();
    let (ca, cb) = affine::solve(&sa, &sb, rank_eps);
    if ca.iter().chain(&cb).any(|&w| w < 0.0) {
        return None;
    }
    let mut na = vec![0.0; a.len()];
    let mut nb = vec![0.0; b.len()];
    for (k, &i) in act_a.iter().enumerate() {
        na[i] = ca[k];
    }
    for (k, &j) in act_b.iter().enumerate() {
        nb[j] = cb[k];
    }
    let old = sq(&diff(&super::combine(a, wa), &super::combine(b, wb)));
    let new = sq(&diff(&super::combine(a, &na), &super::combine(b, &nb)));
    (new <= old).then_some((na, nb))
}
