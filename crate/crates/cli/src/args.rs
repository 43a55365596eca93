use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hullmatch::clustering::{MmcConfig, SplitConfig, SplitMethod};
use hullmatch::geometry::ConvexSolver;
use hullmatch::matching::{ClusterSpec, Comparison};
use hullmatch::{HullKind, SolverConfig};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Parser, Serialize)]
#[command(name = "hullmatch", version, about = "Image-set matching with local convex hulls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Write a synthetic labelled dataset (manifest plus one CSV per set).
    Gen(GenArgs),
    /// Cluster one point set into local hulls.
    Cluster(ClusterCmdArgs),
    /// Classify one query set against a labelled gallery.
    Match(MatchArgs),
    /// Run the gallery/query protocol over a dataset.
    Eval(EvalArgs),
    /// Time set comparisons on paired synthetic sets.
    Bench(BenchArgs),
    /// Estimate the region only a noisy sample reaches, before and after
    /// local hull extraction.
    Probe(ProbeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Convex,
    Affine,
}

impl From<Kind> for HullKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Convex => HullKind::Convex,
            Kind::Affine => HullKind::Affine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Ccp,
    Arc,
    Nn,
}

impl From<Mode> for Comparison {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Single => Comparison::Single,
            Mode::Ccp => Comparison::Ccp,
            Mode::Arc => Comparison::Arc,
            Mode::Nn => Comparison::Nn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mmc,
    Kmeans,
}

impl From<Method> for SplitMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Mmc => SplitMethod::Mmc,
            Method::Kmeans => SplitMethod::KMeans,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Minimum-norm-point active-set solver.
    Minnorm,
    /// Pairwise Frank-Wolfe.
    Pfw,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long, default_value_t = 3)]
    pub sets_per_class: usize,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Side of the box class centres are drawn from.
    #[arg(long, default_value_t = 20.0)]
    pub spread: f64,
    /// Scale of per-set shifts and per-class mode displacements.
    #[arg(long, default_value_t = 1.0)]
    pub offset_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Share of every set's samples replaced by uniform noise.
    #[arg(long)]
    pub noise_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Local hull extraction flags.
#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    /// Fixed number of local hulls per set.
    #[arg(long, conflicts_with = "ammd_threshold")]
    pub clusters: Option<usize>,
    /// Split clusters until their AMMD falls below this value. Depends on the
    /// feature scale.
    #[arg(long)]
    pub ammd_threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = Method::Mmc)]
    pub cluster_method: Method,
    #[arg(long, default_value_t = 3)]
    pub min_cluster_size: usize,
    /// SVM penalty in maximum margin clustering.
    #[arg(long, default_value_t = 1.0)]
    pub c_penalty: f64,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Minimum points per side of an MMC split (default: 20% of the set).
    #[arg(long)]
    pub balance: Option<usize>,
}

impl ClusterArgs {
    pub fn mmc(&self, seed: u64) -> MmcConfig {
        MmcConfig {
            c_penalty: self.c_penalty,
            balance: self.balance,
            restarts: self.restarts,
            seed,
            ..MmcConfig::default()
        }
    }

    /// Cluster spec for a fixed count `k` or an AMMD threshold `thd`.
    pub fn spec(&self, k: Option<usize>, thd: Option<f64>, method: Method, seed: u64) -> ClusterSpec {
        match (k, thd) {
            (Some(k), _) => ClusterSpec::Fixed {
                k,
                method: method.into(),
                mmc: self.mmc(seed),
                seed,
            },
            (None, thd) => ClusterSpec::Adaptive(SplitConfig {
                ammd_threshold: thd.unwrap_or(f64::INFINITY),
                min_cluster_size: self.min_cluster_size,
                method: method.into(),
                mmc: self.mmc(seed),
                seed,
            }),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Solver::Minnorm)]
    pub solver: Solver,
    /// Relative stopping tolerance of the hull distance solver.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// Iteration cap; runs that hit it make the command exit with status 3.
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            convex_solver: match self.solver {
                Solver::Minnorm => ConvexSolver::MinNorm,
                Solver::Pfw => ConvexSolver::PairwiseFrankWolfe,
            },
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterCmdArgs {
    /// Feature CSV to cluster.
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    pub input: Option<PathBuf>,
    /// Dataset manifest; pick the set with `--set`.
    #[arg(long, requires = "set")]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub set: Option<String>,
    #[command(flatten)]
    pub clustering: ClusterArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MatchArgs {
    /// Query feature CSV.
    #[arg(long)]
    pub query: PathBuf,
    /// Gallery manifest.
    #[arg(long)]
    pub gallery: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Convex)]
    pub kind: Kind,
    #[arg(long, value_enum, default_value_t = Mode::Arc)]
    pub mode: Mode,
    /// Let every sample count towards its nearest reference hull instead of
    /// the closest m per hull.
    #[arg(long)]
    pub all_samples: bool,
    /// Standardise features using statistics of the gallery.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub clustering: ClusterArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 1)]
    pub gallery_per_class: usize,
    /// Randomly subsample every set to this many samples per fold.
    #[arg(long)]
    pub subset_size: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "convex")]
    pub kind: Vec<Kind>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "single,ccp,arc,nn")]
    pub mode: Vec<Mode>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mmc")]
    pub cluster_method: Vec<Method>,
    /// Fixed cluster counts to try.
    #[arg(long, value_delimiter = ',')]
    pub clusters: Vec<usize>,
    /// AMMD thresholds to try.
    #[arg(long, value_delimiter = ',')]
    pub ammd_threshold: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub min_cluster_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c_penalty: f64,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long)]
    pub balance: Option<usize>,
    #[arg(long)]
    pub all_samples: bool,
    /// Standardise features over the whole dataset first.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-fold timing records here instead of a summary on stderr.
    #[arg(long)]
    pub timing_out: Option<PathBuf>,
}

impl EvalArgs {
    pub fn clustering(&self) -> ClusterArgs {
        ClusterArgs {
            clusters: None,
            ammd_threshold: None,
            cluster_method: Method::Mmc,
            min_cluster_size: self.min_cluster_size,
            c_penalty: self.c_penalty,
            restarts: self.restarts,
            balance: self.balance,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,400")]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Kind::Convex)]
    pub kind: Kind,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write timing records here instead of a table on stderr.
    #[arg(long)]
    pub timing_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    /// Feature CSV of dimension at most 3.
    #[arg(long)]
    pub input: PathBuf,
    /// Row of the noisy sample (0-based).
    #[arg(long)]
    pub noisy_index: usize,
    /// One cluster index per row; when absent the set is clustered.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 2, conflicts_with = "labels")]
    pub clusters: usize,
    #[arg(long, value_enum, default_value_t = Method::Mmc)]
    pub cluster_method: Method,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
