use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{method_names, REPORT_SCHEMA};
use crate::clustering::{MmcConfig, SplitMethod};
use crate::data::{gen_synthetic, SynthConfig};
use crate::error::{Error, Result};
use crate::geometry::{HullKind, PointSet};
use crate::matching::{
    arc_distance, ccp_distance, nn_distance, single_hull_distance, ClusterSpec, Comparison, LocalHullModel, MatchConfig,
};
use crate::{par, seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub sizes: Vec<usize>,
    pub methods: Vec<MatchConfig>,
    pub repetitions: usize,
    pub dimension: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            sizes: vec![50, 100, 400],
            methods: default_timing_methods(HullKind::Convex, 0),
            repetitions: 5,
            dimension: 16,
            seed: 0,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 {
            return Err(Error::InvalidConfig("timing needs at least two set sizes".into()));
        }
        if self.sizes.iter().any(|&s| s < 2) {
            return Err(Error::InvalidConfig("set sizes must be at least 2".into()));
        }
        if self.repetitions < 5 {
            return Err(Error::InvalidConfig("timing needs at least 5 repetitions".into()));
        }
        if self.dimension == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods configured".into()));
        }
        self.methods.iter().try_for_each(MatchConfig::validate)
    }
}

/// Single hull, then CCP and ARC with MMC clustering at 2 and 10 clusters.
pub fn default_timing_methods(kind: HullKind, seed: u64) -> Vec<MatchConfig> {
    let fixed = |k| ClusterSpec::Fixed {
        k,
        method: SplitMethod::Mmc,
        mmc: MmcConfig::default(),
        seed,
    };
    let mut out = vec![MatchConfig {
        kind,
        comparison: Comparison::Single,
        ..MatchConfig::default()
    }];
    for comparison in [Comparison::Ccp, Comparison::Arc] {
        for k in [2, 10] {
            out.push(MatchConfig {
                kind,
                comparison,
                clustering: fixed(k),
                ..MatchConfig::default()
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub size: usize,
    pub method: String,
    /// Distance of the timed comparison; identical across repetitions.
    pub distance: f64,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub config: TimingConfig,
    pub methods: Vec<String>,
    pub rows: Vec<TimingRow>,
}

impl TimingReport {
    pub fn row(&self, size: usize, method: &str) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.size == size && r.method == method)
    }

    /// Config record and one record per size and method, without the
    /// measured times.
    pub fn records(&self) -> Result<Vec<serde_json::Value>> {
        let mut out = vec![serde_json::json!({
            "record": "config",
            "schema": REPORT_SCHEMA,
            "timing": self.config,
            "methods": self.methods,
        })];
        for r in &self.rows {
            out.push(serde_json::json!({
                "record": "size",
                "size": r.size,
                "method": r.method,
                "distance": r.distance,
                "repetitions": r.repetitions,
            }));
        }
        Ok(out)
    }

    pub fn timing_records(&self) -> Result<Vec<serde_json::Value>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = serde_json::to_value(r)?;
                v["record"] = "timing".into();
                Ok(v)
            })
            .collect()
    }
}

enum Prepared<'a> {
    Pair(&'a PointSet, &'a PointSet),
    Models(LocalHullModel, LocalHullModel),
    Reference(LocalHullModel, &'a PointSet),
}

fn prepare<'a>(cfg: &MatchConfig, a: &'a PointSet, b: &'a PointSet) -> Result<Prepared<'a>> {
    Ok(match cfg.comparison {
        Comparison::Single | Comparison::Nn => Prepared::Pair(a, b),
        Comparison::Ccp => Prepared::Models(
            LocalHullModel::build(a.clone(), &cfg.clustering, cfg.kind)?,
            LocalHullModel::build(b.clone(), &cfg.clustering, cfg.kind)?,
        ),
        Comparison::Arc => Prepared::Reference(LocalHullModel::build(a.clone(), &cfg.clustering, cfg.kind)?, b),
    })
}

fn compare(cfg: &MatchConfig, p: &Prepared) -> Result<f64> {
    let d = match (cfg.comparison, p) {
        (Comparison::Single, Prepared::Pair(a, b)) => single_hull_distance(a, b, cfg.kind, &cfg.solver)?,
        (Comparison::Nn, Prepared::Pair(a, b)) => nn_distance(a, b)?,
        (Comparison::Ccp, Prepared::Models(a, b)) => ccp_distance(a, b, &cfg.solver)?,
        (Comparison::Arc, Prepared::Reference(a, b)) => arc_distance(a, b, &cfg.solver, cfg.top_m_rule)?,
        _ => unreachable!("prepared for this comparison"),
    };
    Ok(d.value)
}

/// Mean wall time of one set comparison on paired synthetic sets of each
/// size, drawn from two different classes. Local hull models are built
/// before timing starts, and every measurement runs on a single thread after
/// one discarded warmup call.
pub fn timing_benchmark(cfg: &TimingConfig) -> Result<TimingReport> {
    cfg.validate()?;
    let names = method_names(&cfg.methods);
    let mut rows = Vec::with_capacity(cfg.sizes.len() * cfg.methods.len());
    for (si, &size) in cfg.sizes.iter().enumerate() {
        let ds = gen_synthetic(&SynthConfig {
            num_classes: 2,
            sets_per_class: 1,
            points_per_set: size,
            dimension: cfg.dimension,
            seed: seed::derive(cfg.seed, si as u64),
            ..SynthConfig::default()
        })?;
        let (a, b) = (&ds.sets()[0], &ds.sets()[1]);
        for (method, name) in cfg.methods.iter().zip(&names) {
            let prepared = prepare(method, a, b)?;
            let (distance, times) = par::sequential(|| -> Result<(f64, Vec<f64>)> {
                let distance = compare(method, &prepared)?;
                let mut times = Vec::with_capacity(cfg.repetitions);
                for _ in 0..cfg.repetitions {
                    let start = Instant::now();
                    compare(method, &prepared)?;
                    times.push(start.elapsed().as_secs_f64());
                }
                Ok((distance, times))
            })?;
            let n = times.len() as f64;
            let mean = times.iter().sum::<f64>() / n;
            let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
            rows.push(TimingRow {
                size,
                method: name.clone(),
                distance,
                repetitions: cfg.repetitions,
                mean_seconds: mean,
                std_seconds: var.sqrt(),
            });
        }
    }
    Ok(TimingReport {
        config: cfg.clone(),
        methods: names,
        rows,
    })
}
