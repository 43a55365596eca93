//! Brute-force reference computations, independent of the library solvers.
//!
//! Shared by the geometry tests and the acceptance suite (included by path).

#![allow(dead_code)]

/// All weight vectors on the `k`-simplex whose entries are multiples of
/// `1/steps`.
pub fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, steps, steps, &mut Vec::new(), &mut out);
    out
}

fn combo(pts: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pts[0].len()];
    for (p, &wi) in pts.iter().zip(w) {
        for (o, &x) in out.iter_mut().zip(p) {
            *o += wi * x;
        }
    }
    out
}

fn sqdist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn objective(a: &[Vec<f64>], b: &[Vec<f64>], wa: &[f64], wb: &[f64]) -> f64 {
    sqdist(&combo(a, wa), &combo(b, wb))
}

/// Moves mass `h` from vertex `from` to vertex `to` when feasible.
fn transfer(w: &[f64], from: usize, to: usize, h: f64) -> Option<Vec<f64>> {
    if w[from] <= 0.0 {
        return None;
    }
    let h = h.min(w[from]);
    let mut n = w.to_vec();
    n[from] -= h;
    n[to] += h;
    Some(n)
}

/// Pattern search over pairwise mass transfers on the product of simplices,
/// halving the step until `min_step`.
fn refine(a: &[Vec<f64>], b: &[Vec<f64>], mut wa: Vec<f64>, mut wb: Vec<f64>, start: f64) -> f64 {
    let mut best = objective(a, b, &wa, &wb);
    let mut h = start;
    while h > 1e-12 {
        let mut improved = true;
        while improved {
            improved = false;
            for side in 0..2 {
                let k = if side == 0 { wa.len() } else { wb.len() };
                for from in 0..k {
                    for to in 0..k {
                        if from == to {
                            continue;
                        }
                        let cand = if side == 0 {
                            transfer(&wa, from, to, h).map(|n| (n, wb.clone()))
                        } else {
                            transfer(&wb, from, to, h).map(|n| (wa.clone(), n))
                        };
                        if let Some((na, nb)) = cand {
                            let f = objective(a, b, &na, &nb);
                            if f < best {
                                best = f;
                                wa = na;
                                wb = nb;
                                improved = true;
                            }
                        }
                    }
                }
            }
        }
        h *= 0.5;
    }
    best.sqrt()
}

/// Convex hull distance by a dense simplex grid followed by local refinement
/// of the best few grid points.
pub fn convex_distance_grid(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let steps = match a.len().max(b.len()) {
        1 | 2 => 200,
        3 => 40,
        _ => 16,
    };
    let ga = simplex_grid(a.len(), steps);
    let gb = simplex_grid(b.len(), steps);
    let pa: Vec<Vec<f64>> = ga.iter().map(|w| combo(a, w)).collect();
    let pb: Vec<Vec<f64>> = gb.iter().map(|w| combo(b, w)).collect();
    let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(pa.len() * pb.len());
    for (i, x) in pa.iter().enumerate() {
        for (j, y) in pb.iter().enumerate() {
            scored.push((sqdist(x, y), i, j));
        }
    }
    scored.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    scored
        .iter()
        .take(5)
        .map(|&(_, i, j)| refine(a, b, ga[i].clone(), gb[j].clone(), 1.0 / steps as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Affine hull distance by explicit Gram–Schmidt projection: orthogonalise
/// all direction vectors of both hulls and project the offset `a0 - b0` onto
/// their orthogonal complement.
pub fn affine_distance_projection(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for p in a.iter().skip(1) {
        dirs.push(p.iter().zip(&a[0]).map(|(x, y)| x - y).collect());
    }
    for p in b.iter().skip(1) {
        dirs.push(p.iter().zip(&b[0]).map(|(x, y)| x - y).collect());
    }
    let scale = a.iter().chain(b).flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in dirs {
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 * scale {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    let mut r: Vec<f64> = a[0].iter().zip(&b[0]).map(|(x, y)| x - y).collect();
    for _ in 0..2 {
        for q in &basis {
            let c: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
            r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimum pairwise Euclidean distance, straight from the definition.
pub fn nearest_pair(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for x in a {
        for y in b {
            best = best.min(sqdist(x, y).sqrt());
        }
    }
    best
}

/// `|got - want| <= rel · max(want, floor)`.
pub fn close_rel(got: f64, want: f64, rel: f64, floor: f64) -> bool {
    (got - want).abs() <= rel * want.max(floor)
}
