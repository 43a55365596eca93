use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{fnv1a, method_names, REPORT_SCHEMA};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::matching::{Gallery, MatchConfig};
use crate::{par, seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub folds: usize,
    pub gallery_per_class: usize,
    /// Subsample every set to this many rows (all rows if smaller).
    pub subset_size: Option<usize>,
    pub methods: Vec<MatchConfig>,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            folds: 10,
            gallery_per_class: 1,
            subset_size: None,
            methods: vec![MatchConfig::default()],
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds == 0 {
            return Err(Error::InvalidConfig("folds must be at least 1".into()));
        }
        if self.gallery_per_class == 0 {
            return Err(Error::InvalidConfig("gallery_per_class must be at least 1".into()));
        }
        if self.subset_size == Some(0) {
            return Err(Error::InvalidConfig("subset_size must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods configured".into()));
        }
        self.methods.iter().try_for_each(MatchConfig::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub query_id: String,
    pub label: String,
    pub predicted_label: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub method: String,
    pub fold: usize,
    /// Fingerprint of the gallery/query split and subsampling of this fold.
    pub split_hash: String,
    pub gallery: Vec<String>,
    pub queries: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Queries with at least one comparison that stopped short of the solver
    /// tolerance.
    pub unconverged: usize,
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub config: MatchConfig,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    /// `confusion[true][predicted]`, summed over folds.
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Wall-clock cost of one method on one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: String,
    pub fold: usize,
    pub comparisons: usize,
    pub total_seconds: f64,
    pub mean_comparison_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub sets: usize,
    pub dim: usize,
    pub classes: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ProtocolConfig,
    pub dataset: DatasetInfo,
    pub folds: Vec<FoldRecord>,
    pub summaries: Vec<MethodSummary>,
    /// Not part of [`EvalReport::records`]; timings differ run to run.
    pub timings: Vec<MethodTiming>,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record<'a> {
    Config {
        schema: u32,
        protocol: &'a ProtocolConfig,
        dataset: &'a DatasetInfo,
        methods: Vec<&'a str>,
    },
    Fold(&'a FoldRecord),
    Summary(&'a MethodSummary),
    Timing(&'a MethodTiming),
}

impl EvalReport {
    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Config record, one record per method per fold, then one summary per
    /// method, as JSON values.
    pub fn records(&self) -> Result<Vec<serde_json::Value>> {
        let mut out = vec![serde_json::to_value(Record::Config {
            schema: REPORT_SCHEMA,
            protocol: &self.config,
            dataset: &self.dataset,
            methods: self.summaries.iter().map(|s| s.method.as_str()).collect(),
        })?];
        for f in &self.folds {
            out.push(serde_json::to_value(Record::Fold(f))?);
        }
        for s in &self.summaries {
            out.push(serde_json::to_value(Record::Summary(s))?);
        }
        Ok(out)
    }

    pub fn timing_records(&self) -> Result<Vec<serde_json::Value>> {
        self.timings
            .iter()
            .map(|t| serde_json::to_value(Record::Timing(t)).map_err(Error::from))
            .collect()
    }
}

struct Split {
    gallery: Vec<PointSet>,
    queries: Vec<PointSet>,
    hash: String,
}

fn subsample(s: &PointSet, m: usize, seed: u64) -> Result<PointSet> {
    if s.len() <= m {
        return Ok(s.clone());
    }
    let mut idx = sample(&mut seed::rng(seed), s.len(), m).into_vec();
    idx.sort_unstable();
    s.subset(&idx)
}

fn make_split(ds: &Dataset, by_class: &[Vec<usize>], cfg: &ProtocolConfig, fold: usize) -> Result<Split> {
    let fold_seed = seed::derive(cfg.seed, fold as u64);
    let mut rng = seed::rng(fold_seed);
    let mut in_gallery = vec![false; ds.len()];
    for members in by_class {
        for i in sample(&mut rng, members.len(), cfg.gallery_per_class) {
            in_gallery[members[i]] = true;
        }
    }
    let mut gallery = Vec::new();
    let mut queries = Vec::new();
    let mut hash_parts: Vec<Vec<u8>> = Vec::new();
    for (i, s) in ds.sets().iter().enumerate() {
        let s = match cfg.subset_size {
            Some(m) => subsample(s, m, seed::derive(fold_seed, 1 + i as u64))?,
            None => s.clone(),
        };
        hash_parts.push(format!("{}:{}", in_gallery[i] as u8, s.id()).into_bytes());
        hash_parts.push(s.as_flat().iter().flat_map(|v| v.to_le_bytes()).collect());
        if in_gallery[i] {
            gallery.push(s);
        } else {
            queries.push(s);
        }
    }
    Ok(Split {
        gallery,
        queries,
        hash: format!("{:016x}", fnv1a(&hash_parts)),
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Repeated gallery/query evaluation. Every fold draws `gallery_per_class`
/// gallery sets per class; all other sets are queries. All methods see the
/// same splits.
pub fn run_protocol(ds: &Dataset, cfg: &ProtocolConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let classes = ds.labels();
    let mut by_class = vec![Vec::new(); classes.len()];
    for (i, s) in ds.sets().iter().enumerate() {
        let Some(label) = s.label() else {
            return Err(Error::InvalidConfig(format!("set {:?} has no label", s.id())));
        };
        let c = classes.iter().position(|l| l == label).expect("label listed");
        by_class[c].push(i);
    }
    for (label, members) in classes.iter().zip(&by_class) {
        if members.len() <= cfg.gallery_per_class {
            return Err(Error::InsufficientSets {
                label: label.clone(),
                available: members.len(),
                required: cfg.gallery_per_class,
            });
        }
    }
    let names = method_names(&cfg.methods);

    let per_fold = par::map_range(cfg.folds, |fold| -> Result<Vec<(FoldRecord, MethodTiming)>> {
        let split = make_split(ds, &by_class, cfg, fold)?;
        let mut gallery = Gallery::new(split.gallery)?;
        let gallery_ids: Vec<String> = gallery.sets().iter().map(|s| s.id().to_string()).collect();
        let mut out = Vec::with_capacity(cfg.methods.len());
        for (method, name) in cfg.methods.iter().zip(&names) {
            let start = Instant::now();
            gallery.prepare(method)?;
            let results = par::map(&split.queries, |q| gallery.classify(q, method));
            let total_seconds = start.elapsed().as_secs_f64();
            let mut predictions = Vec::with_capacity(results.len());
            let mut unconverged = 0;
            for (q, r) in split.queries.iter().zip(results) {
                let r = r?;
                unconverged += usize::from(!r.converged);
                predictions.push(Prediction {
                    query_id: r.query_id,
                    label: q.label().expect("checked above").to_string(),
                    predicted_label: r.predicted_label,
                    distance: r.distance,
                });
            }
            let correct = predictions.iter().filter(|p| p.label == p.predicted_label).count();
            let comparisons = split.queries.len() * gallery_ids.len();
            out.push((
                FoldRecord {
                    method: name.clone(),
                    fold,
                    split_hash: split.hash.clone(),
                    gallery: gallery_ids.clone(),
                    queries: predictions.len(),
                    correct,
                    accuracy: correct as f64 / predictions.len() as f64,
                    unconverged,
                    predictions,
                },
                MethodTiming {
                    method: name.clone(),
                    fold,
                    comparisons,
                    total_seconds,
                    mean_comparison_seconds: total_seconds / comparisons as f64,
                },
            ));
        }
        Ok(out)
    });

    let mut by_method: Vec<Vec<FoldRecord>> = vec![Vec::with_capacity(cfg.folds); cfg.methods.len()];
    let mut timings = Vec::with_capacity(cfg.folds * cfg.methods.len());
    for fold in per_fold {
        for (m, (record, timing)) in fold?.into_iter().enumerate() {
            by_method[m].push(record);
            timings.push(timing);
        }
    }
    let mut summaries = Vec::with_capacity(cfg.methods.len());
    for ((method, name), records) in cfg.methods.iter().zip(&names).zip(&by_method) {
        let fold_accuracies: Vec<f64> = records.iter().map(|r| r.accuracy).collect();
        let (mean_accuracy, std_accuracy) = mean_std(&fold_accuracies);
        let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for p in records.iter().flat_map(|r| &r.predictions) {
            *confusion
                .entry(p.label.clone())
                .or_default()
                .entry(p.predicted_label.clone())
                .or_default() += 1;
        }
        summaries.push(MethodSummary {
            method: name.clone(),
            config: method.clone(),
            mean_accuracy,
            std_accuracy,
            fold_accuracies,
            confusion,
        });
    }
    // Fold-major order: every method's record for fold 0, then fold 1, ...
    let mut folds = Vec::with_capacity(cfg.folds * cfg.methods.len());
    let mut iters: Vec<_> = by_method.into_iter().map(Vec::into_iter).collect();
    for _ in 0..cfg.folds {
        for it in &mut iters {
            folds.push(it.next().expect("one record per fold"));
        }
    }
    Ok(EvalReport {
        config: cfg.clone(),
        dataset: DatasetInfo {
            sets: ds.len(),
            dim: ds.dim(),
            classes,
            metadata: ds.metadata.clone(),
        },
        folds,
        summaries,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::Comparison;

    fn tiny() -> Dataset {
        let sets = (0..4)
            .map(|i| {
                let c = (i / 2) as f64 * 10.0;
                PointSet::new(
                    format!("s{i}"),
                    Some(format!("c{}", i / 2)),
                    vec![vec![c, 0.0], vec![c + 1.0, 0.0], vec![c, 1.0 + i as f64 * 0.1]],
                )
                .unwrap()
            })
            .collect();
        Dataset::new(sets, BTreeMap::new()).unwrap()
    }

    #[test]
    fn two_by_two_enumeration() {
        let cfg = ProtocolConfig {
            folds: 1,
            methods: vec![MatchConfig {
                comparison: Comparison::Single,
                ..MatchConfig::default()
            }],
            ..ProtocolConfig::default()
        };
        let r = run_protocol(&tiny(), &cfg).unwrap();
        assert_eq!(r.folds.len(), 1);
        assert_eq!(r.folds[0].queries, 2);
        assert!([0.0, 0.5, 1.0].contains(&r.folds[0].accuracy));
        assert_eq!(r.records().unwrap().len(), 3);
    }

    #[test]
    fn insufficient_sets() {
        let cfg = ProtocolConfig {
            gallery_per_class: 2,
            ..ProtocolConfig::default()
        };
        assert!(matches!(
            run_protocol(&tiny(), &cfg),
            Err(Error::InsufficientSets {
                available: 2,
                required: 2,
                ..
            })
        ));
    }
}
