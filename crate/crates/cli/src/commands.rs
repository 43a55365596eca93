use std::io::Write as _;
use std::path::Path;

use hullmatch::clustering::{adaptive_split, ammd, fixed_split, MmcConfig, Partition, SplitConfig};
use hullmatch::data::{
    gen_synthetic, inject_noise, load_dataset, load_point_set, save_dataset, standardize, SynthConfig,
};
use hullmatch::eval::{
    default_timing_methods, method_names, noisy_region_estimate, run_protocol, timing_benchmark, to_jsonl,
    write_atomic, ProtocolConfig, TimingConfig, REPORT_SCHEMA,
};
use hullmatch::matching::{Gallery, MatchConfig};
use hullmatch::{seed, Error, HullKind, PointSet};
use serde_json::{json, Value};

use crate::args::{usage, BenchArgs, Cli, ClusterCmdArgs, Command, EvalArgs, GenArgs, MatchArgs, Mode, ProbeArgs};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    let invocation = json!({
        "record": "invocation",
        "schema": REPORT_SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command,
    });
    match &cli.command {
        Command::Gen(a) => gen(a, invocation),
        Command::Cluster(a) => cluster(a, invocation),
        Command::Match(a) => match_cmd(a, invocation),
        Command::Eval(a) => eval(a, invocation),
        Command::Bench(a) => bench(a, invocation),
        Command::Probe(a) => probe(a, invocation),
    }
}

/// Writes the records as JSON lines to `out`, or to standard output.
fn emit(out: Option<&Path>, records: &[Value]) -> Result<()> {
    let text = to_jsonl(records)?;
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?;
        }
    }
    Ok(())
}

fn set_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "set".into())
}

fn gen(a: &GenArgs, invocation: Value) -> Result<()> {
    let cfg = SynthConfig {
        num_classes: a.classes,
        sets_per_class: a.sets_per_class,
        points_per_set: a.points,
        dimension: a.dim,
        class_center_spread: a.spread,
        condition_offset_scale: a.offset_scale,
        cluster_sigma: a.sigma,
        seed: a.seed,
    };
    let mut ds = gen_synthetic(&cfg)?;
    if let Some(f) = a.noise_fraction {
        ds = inject_noise(&ds, f, seed::derive(a.seed, 1))?;
    }
    ds.metadata
        .insert("invocation".into(), serde_json::to_string(&invocation["command"])?);
    let manifest = save_dataset(&ds, &a.out)?;
    emit(
        None,
        &[json!({
            "record": "gen",
            "manifest": manifest,
            "sets": ds.len(),
            "classes": ds.labels().len(),
            "dim": ds.dim(),
        })],
    )
}

fn needs_clusters(mode: Mode) -> bool {
    matches!(mode, Mode::Ccp | Mode::Arc)
}

fn cluster(a: &ClusterCmdArgs, invocation: Value) -> Result<()> {
    let points = match (&a.input, &a.manifest, &a.set) {
        (Some(path), _, _) => load_point_set(path, &set_id(path), None)?,
        (None, Some(manifest), Some(id)) => load_dataset(manifest)?
            .get(id)
            .cloned()
            .ok_or_else(|| usage(format!("set {id:?} not in manifest")))?,
        _ => return Err(usage("give --input or --manifest with --set")),
    };
    let c = &a.clustering;
    let partition = match (c.clusters, c.ammd_threshold) {
        (Some(k), _) => fixed_split(&points, k, c.cluster_method.into(), &c.mmc(a.seed), a.seed)?,
        (None, Some(thd)) => adaptive_split(
            &points,
            &SplitConfig {
                ammd_threshold: thd,
                min_cluster_size: c.min_cluster_size,
                method: c.cluster_method.into(),
                mmc: c.mmc(a.seed),
                seed: a.seed,
            },
        )?,
        (None, None) => return Err(usage("give --clusters or --ammd-threshold")),
    };
    let clusters = partition.clusters();
    let cluster_ammd = clusters
        .iter()
        .map(|members| Ok(ammd(&points.subset(members)?)?.ammd))
        .collect::<Result<Vec<f64>>>()?;
    emit(
        a.out.as_deref(),
        &[
            invocation,
            json!({
                "record": "cluster",
                "set": points.id(),
                "points": points.len(),
                "k": partition.k(),
                "labels": partition.labels(),
                "sizes": partition.sizes(),
                "ammd": cluster_ammd,
            }),
        ],
    )
}

fn match_cmd(a: &MatchArgs, invocation: Value) -> Result<()> {
    if needs_clusters(a.mode) && a.clustering.clusters.is_none() && a.clustering.ammd_threshold.is_none() {
        return Err(usage("--mode ccp and --mode arc need --clusters or --ammd-threshold"));
    }
    let mut gallery_ds = load_dataset(&a.gallery)?;
    let mut query = load_point_set(&a.query, &set_id(&a.query), None)?;
    if a.standardize {
        let (ds, t) = standardize(&gallery_ds)?;
        query = t.apply(&query)?;
        gallery_ds = ds;
    }
    let c = &a.clustering;
    let cfg = MatchConfig {
        kind: a.kind.into(),
        comparison: a.mode.into(),
        clustering: c.spec(c.clusters, c.ammd_threshold, c.cluster_method, a.seed),
        solver: a.solver.config(),
        top_m_rule: !a.all_samples,
    };
    let mut gallery = Gallery::new(gallery_ds.into_sets())?;
    gallery.prepare(&cfg)?;
    let result = gallery.classify(&query, &cfg)?;
    let mut record = serde_json::to_value(&result)?;
    record["record"] = "match".into();
    emit(a.out.as_deref(), &[invocation, record])?;
    if !result.converged {
        return Err(CliError::NotConverged("a hull distance hit the iteration cap".into()));
    }
    Ok(())
}

fn eval_methods(a: &EvalArgs) -> Result<Vec<MatchConfig>> {
    let cl = a.clustering();
    let solver = a.solver.config();
    let mut out: Vec<MatchConfig> = Vec::new();
    for &kind in &a.kind {
        for &mode in &a.mode {
            let base = MatchConfig {
                kind: kind.into(),
                comparison: mode.into(),
                solver,
                top_m_rule: !a.all_samples,
                ..MatchConfig::default()
            };
            if !needs_clusters(mode) {
                out.push(base);
                continue;
            }
            if a.clusters.is_empty() && a.ammd_threshold.is_empty() {
                return Err(usage("--mode ccp and --mode arc need --clusters or --ammd-threshold"));
            }
            for &method in &a.cluster_method {
                for &k in &a.clusters {
                    out.push(MatchConfig {
                        clustering: cl.spec(Some(k), None, method, a.seed),
                        ..base.clone()
                    });
                }
                for &thd in &a.ammd_threshold {
                    out.push(MatchConfig {
                        clustering: cl.spec(None, Some(thd), method, a.seed),
                        ..base.clone()
                    });
                }
            }
        }
    }
    Ok(out)
}

fn eval(a: &EvalArgs, invocation: Value) -> Result<()> {
    let mut ds = load_dataset(&a.manifest)?;
    if a.standardize {
        ds = standardize(&ds)?.0;
    }
    let cfg = ProtocolConfig {
        folds: a.folds,
        gallery_per_class: a.gallery_per_class,
        subset_size: a.subset_size,
        methods: eval_methods(a)?,
        seed: a.seed,
    };
    let report = run_protocol(&ds, &cfg)?;
    let mut records = vec![invocation];
    records.extend(report.records()?);
    emit(a.out.as_deref(), &records)?;
    match &a.timing_out {
        Some(path) => write_atomic(path, to_jsonl(&report.timing_records()?)?.as_bytes())?,
        None => {
            for name in method_names(&cfg.methods) {
                let t: Vec<f64> = report
                    .timings
                    .iter()
                    .filter(|t| t.method == name)
                    .map(|t| t.mean_comparison_seconds)
                    .collect();
                eprintln!(
                    "{name:<40} {:>12.6} s/comparison",
                    t.iter().sum::<f64>() / t.len() as f64
                );
            }
        }
    }
    let unconverged: usize = report.folds.iter().map(|f| f.unconverged).sum();
    if unconverged > 0 {
        return Err(CliError::NotConverged(format!(
            "{unconverged} query evaluations hit the iteration cap"
        )));
    }
    Ok(())
}

fn bench(a: &BenchArgs, invocation: Value) -> Result<()> {
    let kind: HullKind = a.kind.into();
    let solver = a.solver.config();
    let methods = default_timing_methods(kind, a.seed)
        .into_iter()
        .map(|m| MatchConfig { solver, ..m })
        .collect();
    let report = timing_benchmark(&TimingConfig {
        sizes: a.sizes.clone(),
        methods,
        repetitions: a.reps,
        dimension: a.dim,
        seed: a.seed,
    })?;
    let mut records = vec![invocation];
    records.extend(report.records()?);
    emit(a.out.as_deref(), &records)?;
    match &a.timing_out {
        Some(path) => write_atomic(path, to_jsonl(&report.timing_records()?)?.as_bytes())?,
        None => {
            eprintln!("{:>6}  {:<28} {:>12} {:>12}", "size", "method", "mean s", "std s");
            for r in &report.rows {
                eprintln!(
                    "{:>6}  {:<28} {:>12.6} {:>12.6}",
                    r.size, r.method, r.mean_seconds, r.std_seconds
                );
            }
        }
    }
    Ok(())
}

fn read_labels(path: &Path, n: usize) -> Result<Partition> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let labels = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.trim().parse::<usize>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("not a cluster index: {:?}", l.trim()),
            })
        })
        .collect::<std::result::Result<Vec<usize>, Error>>()?;
    if labels.len() != n {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{} labels for {n} samples", labels.len()),
        }
        .into());
    }
    let k = labels.iter().max().map_or(1, |m| m + 1);
    Ok(Partition::new(labels, k)?)
}

fn probe(a: &ProbeArgs, invocation: Value) -> Result<()> {
    let points: PointSet = load_point_set(&a.input, &set_id(&a.input), None)?;
    let partition = match &a.labels {
        Some(path) => read_labels(path, points.len())?,
        None => fixed_split(
            &points,
            a.clusters,
            a.cluster_method.into(),
            &MmcConfig {
                seed: a.seed,
                ..MmcConfig::default()
            },
            a.seed,
        )?,
    };
    let report = noisy_region_estimate(&points, a.noisy_index, &partition, a.samples, a.seed)?;
    let mut record = serde_json::to_value(&report)?;
    record["record"] = "probe".into();
    record["strictly_reduced"] = report.strictly_reduced().into();
    record["partition"] = json!(partition.labels());
    emit(a.out.as_deref(), &[invocation, record])
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;
    use hullmatch::matching::Comparison;

    fn eval_args(extra: &[&str]) -> EvalArgs {
        let mut argv = vec!["hullmatch", "eval", "--manifest", "m.jsonl"];
        argv.extend_from_slice(extra);
        match Cli::parse_from(argv).command {
            Command::Eval(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn eval_grid_expands_clustered_modes_only() {
        let a = eval_args(&["--kind", "convex,affine", "--mode", "single,arc", "--clusters", "2,10"]);
        let methods = eval_methods(&a).unwrap();
        assert_eq!(methods.len(), 2 * (1 + 2));
        assert_eq!(methods.iter().filter(|m| m.comparison == Comparison::Arc).count(), 4);
    }

    #[test]
    fn clustered_modes_need_a_cluster_flag() {
        let a = eval_args(&["--mode", "ccp"]);
        assert!(matches!(eval_methods(&a), Err(CliError::Usage(_))));
    }
}
