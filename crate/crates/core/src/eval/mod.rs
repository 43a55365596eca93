//! Evaluation: the gallery/query protocol, the timing benchmark and the
//! Monte-Carlo probe of the region a noisy sample adds to a hull.
//!
//! Reports are written as JSON lines. Everything in a report is a function of
//! the inputs and the seed; wall-clock measurements are kept in separate
//! timing records so that reports can be compared byte for byte.

mod probe;
mod protocol;
mod timing;

pub use probe::{noisy_region_estimate, NoisyRegionReport, MEMBERSHIP_TOLERANCE};
pub use protocol::{
    run_protocol, DatasetInfo, EvalReport, FoldRecord, MethodSummary, MethodTiming, Prediction, ProtocolConfig,
};
pub use timing::{default_timing_methods, timing_benchmark, TimingConfig, TimingReport, TimingRow};

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::clustering::SplitMethod;
use crate::error::{Error, Result};
use crate::matching::{ClusterSpec, Comparison, MatchConfig};

/// Version of the JSON-lines report layout.
pub const REPORT_SCHEMA: u32 = 1;

/// Short name of a method, e.g. `convex-arc-mmc-k10` or
/// `affine-ccp-kmeans-thd5`.
pub fn method_name(cfg: &MatchConfig) -> String {
    let base = format!("{}-{}", cfg.kind, cfg.comparison);
    match cfg.comparison {
        Comparison::Single | Comparison::Nn => base,
        Comparison::Ccp | Comparison::Arc => {
            let (method, count): (SplitMethod, String) = match &cfg.clustering {
                ClusterSpec::Adaptive(s) => (s.method, format!("thd{}", s.ammd_threshold)),
                ClusterSpec::Fixed { k, method, .. } => (*method, format!("k{k}")),
            };
            let top = if cfg.comparison == Comparison::Arc && !cfg.top_m_rule {
                "-all"
            } else {
                ""
            };
            format!("{base}-{method}-{count}{top}")
        }
    }
}

/// Distinct names for a list of methods; repeats get a `#n` suffix.
pub fn method_names(methods: &[MatchConfig]) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(methods.len());
    for m in methods {
        let base = method_name(m);
        let mut name = base.clone();
        let mut n = 2;
        while names.contains(&name) {
            name = format!("{base}#{n}");
            n += 1;
        }
        names.push(name);
    }
    names
}

/// FNV-1a, used to fingerprint fold splits.
pub(crate) fn fnv1a(parts: impl IntoIterator<Item = impl AsRef<[u8]>>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for &b in p.as_ref() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Serialises each record as one JSON line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
