//! File formats.
//!
//! Feature file: UTF-8 CSV, one sample per row, `,` separated, `.` decimal.
//! Lines starting with `#` are comments; a `# format=1` line marks the
//! version. Blank lines are ignored.
//!
//! Manifest: a `# format=1` line, optional `# key=value` metadata lines, then
//! one JSON object per line, `{"id": ..., "label": ..., "path": ...}`, with
//! `path` relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::par;

pub const FORMAT_LINE: &str = "# format=1";

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    label: Option<String>,
    path: String,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Checks a `#` line for a version tag other than 1.
fn check_format(path: &Path, line_no: usize, comment: &str) -> Result<()> {
    if let Some(v) = comment.trim_start_matches('#').trim().strip_prefix("format=") {
        if v.trim() != "1" {
            return Err(parse_err(path, line_no, format!("unsupported format {}", v.trim())));
        }
    }
    Ok(())
}

/// Reads one feature file into a point set.
pub fn load_point_set(path: &Path, id: &str, label: Option<String>) -> Result<PointSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut dim = None;
    let mut data = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            check_format(path, line_no, line)?;
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("not a number: {:?}", field.trim())))?;
            if !v.is_finite() {
                return Err(parse_err(path, line_no, "non-finite value"));
            }
            data.push(v);
        }
        let width = data.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(parse_err(path, line_no, format!("expected {d} columns, found {width}")));
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| parse_err(path, 0, "no samples"))?;
    PointSet::from_flat(id, label, dim, data)
}

pub fn write_point_set(path: &Path, set: &PointSet) -> Result<()> {
    let mut out = String::with_capacity(set.as_flat().len() * 20);
    out.push_str(FORMAT_LINE);
    out.push('\n');
    for p in set.points() {
        for (j, v) in p.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // Debug formatting is the shortest representation that parses
            // back to the same value.
            write!(out, "{v:?}").expect("writing to a string");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(manifest: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut metadata = BTreeMap::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            check_format(manifest, line_no, line)?;
            let body = line.trim_start_matches('#').trim();
            if let Some((k, v)) = body.split_once('=') {
                if k.trim() != "format" {
                    metadata.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| parse_err(manifest, line_no, e.to_string()))?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(parse_err(manifest, 0, "manifest lists no sets"));
    }
    let sets = par::map(&records, |r| {
        let p: PathBuf = base.join(&r.path);
        load_point_set(&p, &r.id, r.label.clone())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Dataset::new(sets, metadata)
}

fn file_name(index: usize, id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{index:04}_{safe}.csv")
}

/// Writes `manifest.jsonl` plus one CSV per set into `dir` and returns the
/// manifest path.
pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::new();
    manifest.push_str(FORMAT_LINE);
    manifest.push('\n');
    for (k, v) in &ds.metadata {
        writeln!(manifest, "# {k}={v}").expect("writing to a string");
    }
    for (i, s) in ds.sets().iter().enumerate() {
        let name = file_name(i, s.id());
        write_point_set(&dir.join(&name), s)?;
        let rec = Record {
            id: s.id().to_string(),
            label: s.label().map(str::to_string),
            path: name,
        };
        manifest.push_str(&serde_json::to_string(&rec)?);
        manifest.push('\n');
    }
    let path = dir.join("manifest.jsonl");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
