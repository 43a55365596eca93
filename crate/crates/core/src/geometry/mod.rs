//! Hull models over feature-vector sets and nearest-point distances between
//! them.
//!
//! A [`PointSet`] is an ordered, immutable collection of equal-length finite
//! vectors. A [`Hull`] selects a subset of a set's points and interprets it
//! either as an affine hull (weights sum to one) or a convex hull (weights
//! additionally non-negative). The distance solvers return the nearest pair of
//! points together with the weight vectors that produce them, so every result
//! can be checked independently of the solver.

mod affine;
mod convex;
mod linalg;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use convex::ConvexSolver;

/// A single finite feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(coord) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: 0, coord });
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// An ordered set of feature vectors sharing one dimension ("image set").
///
/// Points are stored row-major in one buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    id: String,
    label: Option<String>,
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn new(id: impl Into<String>, label: Option<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptySet)?;
        let mut data = Vec::with_capacity(dim * rows.len());
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(id, label, dim, data)
    }

    pub fn from_flat(id: impl Into<String>, label: Option<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() {
            return Err(Error::EmptySet);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                coord: pos % dim,
            });
        }
        Ok(Self {
            id: id.into(),
            label,
            dim,
            data,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn feature_vector(&self, i: usize) -> FeatureVector {
        FeatureVector(self.point(i).to_vec())
    }

    /// New set holding the given points, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<PointSet> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
            data.extend_from_slice(self.point(i));
        }
        PointSet::from_flat(self.id.clone(), self.label.clone(), self.dim, data)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }

    /// Applies `f` to every coordinate, keeping id and label.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<PointSet> {
        let dim = self.dim;
        let data = self.data.iter().enumerate().map(|(pos, &v)| f(pos % dim, v)).collect();
        PointSet::from_flat(self.id.clone(), self.label.clone(), dim, data)
    }

    pub(crate) fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HullKind {
    Affine,
    Convex,
}

impl fmt::Display for HullKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HullKind::Affine => f.write_str("affine"),
            HullKind::Convex => f.write_str("convex"),
        }
    }
}

impl std::str::FromStr for HullKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(HullKind::Affine),
            "convex" => Ok(HullKind::Convex),
            other => Err(Error::InvalidConfig(format!("unknown hull kind {other:?}"))),
        }
    }
}

/// Affine or convex hull over a subset of a point set's samples.
#[derive(Clone, Debug)]
pub struct Hull<'a> {
    source: &'a PointSet,
    vertices: Vec<usize>,
    kind: HullKind,
}

impl<'a> Hull<'a> {
    pub fn new(source: &'a PointSet, vertices: Vec<usize>, kind: HullKind) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidHull("no vertices".into()));
        }
        let mut seen = vec![false; source.len()];
        for &v in &vertices {
            if v >= source.len() {
                return Err(Error::IndexOutOfRange {
                    index: v,
                    len: source.len(),
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidHull(format!("vertex {v} listed twice")));
            }
        }
        Ok(Self { source, vertices, kind })
    }

    /// Hull over every point of `source`.
    pub fn whole(source: &'a PointSet, kind: HullKind) -> Self {
        Self {
            source,
            vertices: (0..source.len()).collect(),
            kind,
        }
    }

    pub fn kind(&self) -> HullKind {
        self.kind
    }

    pub fn source(&self) -> &'a PointSet {
        self.source
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn vertex(&self, i: usize) -> &'a [f64] {
        self.source.point(self.vertices[i])
    }

    fn vertex_slices(&self) -> Vec<&'a [f64]> {
        self.vertices.iter().map(|&v| self.source.point(v)).collect()
    }
}

/// Stopping rules shared by the hull-distance solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Frank–Wolfe duality gap threshold, relative to the squared problem scale.
    pub tolerance: f64,
    /// Iteration cap; `None` means `10·(m+n)·d`, capped at 100 000.
    pub max_iterations: Option<usize>,
    /// Singular values below `rank_epsilon·σ_max` are treated as zero.
    pub rank_epsilon: f64,
    pub convex_solver: ConvexSolver,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: None,
            rank_epsilon: 1e-10,
            convex_solver: ConvexSolver::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be > 0".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(self.rank_epsilon > 0.0 && self.rank_epsilon < 1.0) {
            return Err(Error::InvalidConfig("rank_epsilon must be in (0, 1)".into()));
        }
        Ok(())
    }

    pub(crate) fn iteration_cap(&self, m: usize, n: usize, d: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (10 * (m + n) * d).clamp(1, 100_000))
    }
}

/// Nearest points between two hulls, with the weights that generate them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullDistanceResult {
    pub distance: f64,
    pub weights_a: Vec<f64>,
    pub weights_b: Vec<f64>,
    pub witness_a: FeatureVector,
    pub witness_b: FeatureVector,
    pub iterations: usize,
    pub converged: bool,
}

pub fn convex_hull_distance(a: &Hull, b: &Hull, cfg: &SolverConfig) -> Result<HullDistanceResult> {
    check_pair(a, b, cfg)?;
    if a.kind != HullKind::Convex || b.kind != HullKind::Convex {
        return Err(Error::InvalidHull("convex_hull_distance needs convex hulls".into()));
    }
    Ok(solve_convex(&a.vertex_slices(), &b.vertex_slices(), cfg))
}

pub fn affine_hull_distance(a: &Hull, b: &Hull, cfg: &SolverConfig) -> Result<HullDistanceResult> {
    check_pair(a, b, cfg)?;
    if a.kind != HullKind::Affine || b.kind != HullKind::Affine {
        return Err(Error::InvalidHull("affine_hull_distance needs affine hulls".into()));
    }
    Ok(solve_affine(&a.vertex_slices(), &b.vertex_slices(), cfg))
}

/// Distance between two hulls of the same kind, dispatching on that kind.
pub fn hull_distance(a: &Hull, b: &Hull, cfg: &SolverConfig) -> Result<HullDistanceResult> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch);
    }
    match a.kind {
        HullKind::Affine => affine_hull_distance(a, b, cfg),
        HullKind::Convex => convex_hull_distance(a, b, cfg),
    }
}

/// Distance from a point to a hull. Side A of the result is the point itself
/// (weight 1); side B carries the hull's weight certificate.
pub fn point_to_hull_distance(p: &[f64], h: &Hull, cfg: &SolverConfig) -> Result<HullDistanceResult> {
    cfg.validate()?;
    h.source.check_dim(p.len())?;
    if let Some(coord) = p.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { point: 0, coord });
    }
    let a = [p];
    let b = h.vertex_slices();
    Ok(match h.kind {
        HullKind::Convex => solve_convex(&a, &b, cfg),
        HullKind::Affine => solve_affine(&a, &b, cfg),
    })
}

fn check_pair(a: &Hull, b: &Hull, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    a.source.check_dim(b.dim())
}

pub(crate) fn solve_convex(a: &[&[f64]], b: &[&[f64]], cfg: &SolverConfig) -> HullDistanceResult {
    let (ua, map_a) = dedup(a);
    let (ub, map_b) = dedup(b);
    let raw = convex::solve(&ua, &ub, cfg);
    finish(
        a,
        b,
        &map_a,
        &map_b,
        &raw.weights_a,
        &raw.weights_b,
        raw.iterations,
        raw.converged,
    )
}

pub(crate) fn solve_affine(a: &[&[f64]], b: &[&[f64]], cfg: &SolverConfig) -> HullDistanceResult {
    let (ua, map_a) = dedup(a);
    let (ub, map_b) = dedup(b);
    let (wa, wb) = affine::solve(&ua, &ub, cfg.rank_epsilon);
    finish(a, b, &map_a, &map_b, &wa, &wb, 1, true)
}

/// Unique vertices (first occurrence kept) plus, for each unique vertex, the
/// index of its first occurrence in the input.
fn dedup<'a>(pts: &[&'a [f64]]) -> (Vec<&'a [f64]>, Vec<usize>) {
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::with_capacity(pts.len());
    let mut unique = Vec::with_capacity(pts.len());
    let mut first = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        // +0.0 and -0.0 compare equal as coordinates.
        let key: Vec<u64> = p.iter().map(|v| (v + 0.0).to_bits()).collect();
        if seen.insert(key, ()).is_none() {
            unique.push(*p);
            first.push(i);
        }
    }
    (unique, first)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &[&[f64]],
    b: &[&[f64]],
    map_a: &[usize],
    map_b: &[usize],
    wa_unique: &[f64],
    wb_unique: &[f64],
    iterations: usize,
    converged: bool,
) -> HullDistanceResult {
    let expand = |n: usize, map: &[usize], w: &[f64]| {
        let mut out = vec![0.0; n];
        for (k, &i) in map.iter().enumerate() {
            out[i] = w[k];
        }
        out
    };
    let weights_a = expand(a.len(), map_a, wa_unique);
    let weights_b = expand(b.len(), map_b, wb_unique);
    let witness_a = combine(a, &weights_a);
    let witness_b = combine(b, &weights_b);
    let distance = dist(&witness_a, &witness_b);
    HullDistanceResult {
        distance,
        weights_a,
        weights_b,
        witness_a: FeatureVector(witness_a),
        witness_b: FeatureVector(witness_b),
        iterations,
        converged,
    }
}

pub(crate) fn combine(pts: &[&[f64]], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pts[0].len()];
    for (p, &wi) in pts.iter().zip(w) {
        if wi != 0.0 {
            for (o, &x) in out.iter_mut().zip(p.iter()) {
                *o += wi * x;
            }
        }
    }
    out
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}
