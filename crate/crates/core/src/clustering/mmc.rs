//! Maximum margin clustering by alternating optimisation: train a linear SVM
//! on the current labels, then relabel every point by the side of the
//! hyperplane it falls on, subject to a class-balance constraint.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::svm::{self, Gram, SvmModel};
use super::{kmeans, Partition};
use crate::error::{Error, Result};
use crate::geometry::{dot, PointSet};
use crate::{par, seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmcConfig {
    /// SVM slack weight `C`.
    pub c_penalty: f64,
    /// Largest allowed `|#positive − #negative|`; `None` means `⌈0.2·n⌉`.
    pub balance: Option<usize>,
    pub max_outer_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub svm_tolerance: f64,
}

impl Default for MmcConfig {
    fn default() -> Self {
        MmcConfig {
            c_penalty: 1.0,
            balance: None,
            max_outer_iterations: 50,
            restarts: 4,
            seed: 0,
            svm_tolerance: 1e-6,
        }
    }
}

impl MmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.c_penalty.is_finite() || self.c_penalty <= 0.0 {
            return Err(Error::InvalidConfig("c_penalty must be positive".into()));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidConfig("max_outer_iterations must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.svm_tolerance.is_nan() || self.svm_tolerance <= 0.0 {
            return Err(Error::InvalidConfig("svm_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Balance bound actually enforced for `n` points: at least the parity of
    /// `n`, and at most `n − 2` so both sides keep a point.
    pub fn effective_balance(&self, n: usize) -> usize {
        let l = self.balance.unwrap_or_else(|| (0.2 * n as f64).ceil() as usize);
        l.min(n.saturating_sub(2)).max(n % 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Hyperplane {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }
}

/// One alternating run from one initial labelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    /// Objective of the SVM trained on the initial labels.
    pub init_objective: f64,
    /// Margin of that SVM.
    pub init_margin: f64,
    /// Objective after each SVM fit on balanced labels.
    pub objective_trace: Vec<f64>,
    pub final_objective: f64,
    pub final_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmcResult {
    pub partition: Partition,
    /// `1/‖w‖` of the final hyperplane.
    pub margin: f64,
    pub objective: f64,
    pub hyperplane: Hyperplane,
    /// Trace of the selected restart.
    pub objective_trace: Vec<f64>,
    /// Index of the selected restart; 0 is the k-means start.
    pub selected_restart: usize,
    pub restarts: Vec<RestartTrace>,
    /// All points coincide, so no direction separates them. The partition
    /// then splits by index parity.
    pub degenerate: bool,
}

/// Two-way maximum margin clustering.
///
/// Restart 0 starts from k-means (k = 2); the others from seeded random
/// balanced labellings. The restart with the lowest final objective wins,
/// ties going to the lower index. In the returned partition the cluster
/// holding point 0 is cluster 0.
pub fn mmc_bipartition(points: &PointSet, cfg: &MmcConfig) -> Result<MmcResult> {
    cfg.validate()?;
    let n = points.len();
    if n < 2 {
        return Err(Error::ClusterCountOutOfRange { k: 2, n });
    }
    let first = points.point(0);
    if points.points().all(|p| p == first) {
        return Ok(degenerate(n, points.dim()));
    }
    let gram = Gram::new(points);
    let balance = cfg.effective_balance(n);
    let km = kmeans(points, 2, seed::derive(cfg.seed, 0))?;
    let inits: Vec<Vec<i8>> = (0..cfg.restarts)
        .map(|r| {
            if r == 0 {
                km.labels().iter().map(|&l| if l == 0 { 1 } else { -1 }).collect()
            } else {
                random_balanced(n, seed::derive(cfg.seed, r as u64))
            }
        })
        .collect();
    let runs = par::map(&inits, |y0| run(points, &gram, y0.clone(), balance, cfg));
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.trace.final_objective < runs[best].trace.final_objective {
            best = r;
        }
    }
    let chosen = &runs[best];
    let flip = chosen.labels[0] == -1;
    let labels = chosen.labels.iter().map(|&y| usize::from((y == 1) == flip)).collect();
    Ok(MmcResult {
        partition: Partition { labels, k: 2 },
        margin: chosen.model.margin,
        objective: chosen.model.objective,
        hyperplane: Hyperplane {
            w: chosen.model.w.clone(),
            b: chosen.model.b,
        },
        objective_trace: chosen.trace.objective_trace.clone(),
        selected_restart: best,
        restarts: runs.into_iter().map(|r| r.trace).collect(),
        degenerate: false,
    })
}

struct Run {
    labels: Vec<i8>,
    model: SvmModel,
    trace: RestartTrace,
}

fn run(points: &PointSet, gram: &Gram, y0: Vec<i8>, balance: usize, cfg: &MmcConfig) -> Run {
    let c = cfg.c_penalty;
    let fit = |y: &[i8]| svm::train(points, gram, y, c, cfg.svm_tolerance);
    let init = fit(&y0);
    let (init_objective, init_margin) = (init.objective, init.margin);
    let mut f = decisions(points, &init.w);
    let (mut y, b) = relabel(&f, init.b, balance);
    let mut model = svm::model(init.w, b, &f, &y, c);
    let mut trace = Vec::new();
    for _ in 0..cfg.max_outer_iterations {
        // Keep the previous hyperplane if the refit is no better on the new
        // labels; it is feasible for them, so the trace stays monotone.
        let cand = fit(&y);
        if cand.objective <= model.objective {
            model = cand;
            f = decisions(points, &model.w);
        }
        trace.push(model.objective);
        let (next, b) = relabel(&f, model.b, balance);
        if next == y || svm::objective(&model.w, b, &f, &next, c) >= model.objective {
            break;
        }
        y = next;
        model = svm::model(model.w, b, &f, &y, c);
    }
    let trace = RestartTrace {
        init_objective,
        init_margin,
        objective_trace: trace,
        final_objective: model.objective,
        final_margin: model.margin,
    };
    Run {
        labels: y,
        model,
        trace,
    }
}

fn decisions(points: &PointSet, w: &[f64]) -> Vec<f64> {
    points.points().map(|p| dot(w, p)).collect()
}

/// Labels by sign of `f + b`, then flips the points closest to the
/// hyperplane on the larger side until `|Σy| ≤ balance`. For a fixed
/// hyperplane this minimises the hinge sum over balanced labellings.
fn relabel_at(f: &[f64], b: f64, balance: usize) -> Vec<i8> {
    let mut y: Vec<i8> = f.iter().map(|&fi| if fi + b >= 0.0 { 1 } else { -1 }).collect();
    let sum: i64 = y.iter().map(|&v| v as i64).sum();
    if sum.unsigned_abs() as usize > balance {
        let major: i8 = if sum > 0 { 1 } else { -1 };
        let flips = (sum.unsigned_abs() as usize - balance).div_ceil(2);
        let mut order: Vec<usize> = (0..y.len()).filter(|&i| y[i] == major).collect();
        order.sort_by(|&i, &j| (f[i] + b).abs().total_cmp(&(f[j] + b).abs()).then(i.cmp(&j)));
        for &i in order.iter().take(flips) {
            y[i] = -major;
        }
    }
    y
}

fn hinge(f: &[f64], y: &[i8], b: f64) -> f64 {
    f.iter()
        .zip(y)
        .map(|(&fi, &yi)| (1.0 - yi as f64 * (fi + b)).max(0.0))
        .sum()
}

/// Balanced labels and offset minimising the hinge sum for a fixed `w`.
///
/// For any fixed labelling the hinge sum is convex piecewise linear in `b`
/// with kinks at `−fᵢ ± 1`, so the joint minimum is attained at one of
/// those points. The current offset is tried first and kept on ties.
fn relabel(f: &[f64], b: f64, balance: usize) -> (Vec<i8>, f64) {
    let mut best_y = relabel_at(f, b, balance);
    let mut best_b = b;
    let mut best = hinge(f, &best_y, b);
    let mut candidates: Vec<f64> = f.iter().flat_map(|&fi| [-fi - 1.0, -fi + 1.0]).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for cb in candidates {
        let y = relabel_at(f, cb, balance);
        let h = hinge(f, &y, cb);
        if h < best {
            best = h;
            best_y = y;
            best_b = cb;
        }
    }
    (best_y, best_b)
}

fn random_balanced(n: usize, seed: u64) -> Vec<i8> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let mut y = vec![-1; n];
    for &i in &order[..n.div_ceil(2)] {
        y[i] = 1;
    }
    y
}

fn degenerate(n: usize, d: usize) -> MmcResult {
    MmcResult {
        partition: Partition {
            labels: (0..n).map(|i| i % 2).collect(),
            k: 2,
        },
        margin: 0.0,
        objective: 0.0,
        hyperplane: Hyperplane {
            w: vec![0.0; d],
            b: 0.0,
        },
        objective_trace: Vec::new(),
        selected_restart: 0,
        restarts: Vec::new(),
        degenerate: true,
    }
}
