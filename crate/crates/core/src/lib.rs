//! Adaptive multi convex hull matching of feature-vector sets.
//!
//! Sets of feature vectors (for instance one vector per video frame) are
//! compared through the nearest points of hulls built over them. A set can be
//! modelled by a single affine or convex hull, or split into local convex
//! hulls by maximum margin clustering, with the number of clusters driven by
//! the average minimal middle-point distance (AMMD). Gallery sets are then
//! compared against a query either over all local hull pairs or by adaptive
//! reference clustering, where each gallery set is re-clustered around the
//! query's local hulls.
//!
//! Modules:
//! - [`geometry`]: point sets, hulls, nearest-point distance solvers
//! - [`clustering`]: k-means, maximum margin bipartition, AMMD, splitting
//! - [`matching`]: set-to-set distances and the gallery classifier
//! - [`data`]: CSV/manifest IO, synthetic data, noise, standardisation
//! - [`eval`]: evaluation protocol, timing benchmark, noisy-region probe

pub mod clustering;
pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod matching;
pub mod par;
pub mod seed;

pub use error::{Error, Result};
pub use geometry::{FeatureVector, Hull, HullDistanceResult, HullKind, PointSet, SolverConfig};
