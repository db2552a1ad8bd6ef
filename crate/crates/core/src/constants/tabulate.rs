//! Content-addressed cache of constant estimates.
//!
//! Each entry is one JSON document named by the SHA-256 of the canonical
//! request (inputs, grid step, horizon policy, seed and schema version).
//! Unreadable or stale documents are recomputed and overwritten.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::drift::{DriftSpec, Side};
use super::estimate::{piterbarg_estimate, McOptions, PiterbargProblem};
use super::ladder::{pickands_estimate, piterbarg_limit, piterbarg_limit_interval, LadderPolicy, PickandsPolicy};
use super::ConstantEstimate;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "VGX_CACHE_DIR";

pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".vgx-cache"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum TableTarget {
    Piterbarg { s1: f64, s2: f64 },
    Limit { side: Side, policy: LadderPolicy },
    /// Interval with at least one unbounded end; `None` stands for infinity.
    LimitInterval { lower: Option<f64>, upper: Option<f64>, policy: LadderPolicy },
    Pickands { policy: PickandsPolicy },
}

#[derive(Debug, Clone)]
pub struct TableRequest {
    pub alpha: Vec<f64>,
    pub a: Vec<f64>,
    pub drift: DriftSpec,
    pub target: TableTarget,
    pub opts: McOptions,
}

#[derive(Serialize)]
struct CanonicalKey<'a> {
    schema_version: u32,
    alpha: &'a [f64],
    a: &'a [f64],
    drift: String,
    target: &'a TableTarget,
    opts: &'a McOptions,
}

impl TableRequest {
    pub fn key(&self) -> String {
        let canonical = serde_json::to_string(&CanonicalKey {
            schema_version: SCHEMA_VERSION,
            alpha: &self.alpha,
            a: &self.a,
            drift: self.drift.id(),
            target: &self.target,
            opts: &self.opts,
        })
        .expect("request serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn compute(&self) -> Result<ConstantEstimate> {
        match &self.target {
            TableTarget::Pickands { policy } => pickands_estimate(&self.alpha, &self.a, &self.opts, policy),
            TableTarget::Piterbarg { s1, s2 } => {
                let p = PiterbargProblem::new(self.alpha.clone(), self.a.clone(), self.drift.clone())?;
                piterbarg_estimate(&p, *s1, *s2, &self.opts)
            }
            TableTarget::Limit { side, policy } => {
                let p = PiterbargProblem::new(self.alpha.clone(), self.a.clone(), self.drift.clone())?;
                piterbarg_limit(&p, *side, &self.opts, policy)
            }
            TableTarget::LimitInterval { lower, upper, policy } => {
                let p = PiterbargProblem::new(self.alpha.clone(), self.a.clone(), self.drift.clone())?;
                let x1 = lower.unwrap_or(f64::NEG_INFINITY);
                let x2 = upper.unwrap_or(f64::INFINITY);
                piterbarg_limit_interval(&p, x1, x2, &self.opts, policy)
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    schema_version: u32,
    key: String,
    estimate: ConstantEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub key: String,
    pub estimate: ConstantEstimate,
    pub from_cache: bool,
}

fn load(path: &Path, key: &str) -> Option<ConstantEstimate> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
        Err(e) => {
            log::warn!("cache entry {} unreadable ({e}); recomputing", path.display());
            return None;
        }
    };
    match serde_json::from_str::<CacheEntry>(&text) {
        Ok(entry) if entry.schema_version == SCHEMA_VERSION && entry.key == key => Some(entry.estimate),
        Ok(entry) => {
            log::warn!(
                "cache entry {} has schema {} (want {SCHEMA_VERSION}); recomputing",
                path.display(),
                entry.schema_version
            );
            None
        }
        Err(e) => {
            log::warn!("cache entry {} is corrupt ({e}); recomputing", path.display());
            None
        }
    }
}

fn store(dir: &Path, path: &Path, key: &str, estimate: &ConstantEstimate) -> Result<()> {
    let entry = CacheEntry { schema_version: SCHEMA_VERSION, key: key.to_string(), estimate: estimate.clone() };
    let tmp = dir.join(format!(".{key}.tmp"));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(serde_json::to_string_pretty(&entry)?.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Serves each request from `cache_dir` when possible, computes and stores
/// the rest. Requests are processed in order by the calling thread, which is
/// the only writer.
pub fn tabulate(requests: &[TableRequest], cache_dir: &Path) -> Result<Vec<TableRow>> {
    fs::create_dir_all(cache_dir)?;
    requests
        .iter()
        .map(|req| {
            let key = req.key();
            let path = cache_dir.join(format!("{key}.json"));
            if let Some(estimate) = load(&path, &key) {
                return Ok(TableRow { key, estimate, from_cache: true });
            }
            let estimate = req.compute()?;
            store(cache_dir, &path, &key, &estimate)?;
            Ok(TableRow { key, estimate, from_cache: false })
        })
        .collect()
}

/// CSV with columns `n,alpha1..,a1..,drift_id,S1,S2,delta,R,value,stderr`;
/// the per-coordinate columns are padded to the widest row.
pub fn table_csv(rows: &[TableRow]) -> String {
    let width = rows.iter().map(|r| r.estimate.alpha.len()).max().unwrap_or(1);
    let mut header = vec!["n".to_string()];
    header.extend((1..=width).map(|i| format!("alpha{i}")));
    header.extend((1..=width).map(|i| format!("a{i}")));
    header.extend(["drift_id", "S1", "S2", "delta", "R", "value", "stderr"].map(String::from));
    let mut out = header.join(",") + "\n";
    for r in rows {
        let e = &r.estimate;
        let pad = |v: &[f64]| (0..width).map(|i| v.get(i).map(|x| x.to_string()).unwrap_or_default()).collect::<Vec<_>>();
        let mut cells = vec![e.alpha.len().to_string()];
        cells.extend(pad(&e.alpha));
        cells.extend(pad(&e.a));
        cells.push(format!("\"{}\"", e.drift.replace('"', "\"\"")));
        cells.extend([e.s1, e.s2, e.grid_step].map(|x| x.to_string()));
        cells.push(e.replicates.to_string());
        cells.extend([e.value, e.std_error].map(|x| x.to_string()));
        out += &(cells.join(",") + "\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::drift::Drift;
    use super::*;

    fn request(c: f64) -> TableRequest {
        TableRequest {
            alpha: vec![1.0],
            a: vec![0.5],
            drift: DriftSpec::new(vec![Drift::LinearPositive { c }]),
            target: TableTarget::Piterbarg { s1: 0.0, s2: 1.0 },
            opts: McOptions::default().with_replicates(500).with_delta(1.0 / 16.0),
        }
    }

    #[test]
    fn repeat_request_is_served_bit_identically() {
        let dir = tempfile::tempdir().unwrap();
        let first = tabulate(&[request(0.5)], dir.path()).unwrap();
        let second = tabulate(&[request(0.5)], dir.path()).unwrap();
        assert!(!first[0].from_cache);
        assert!(second[0].from_cache);
        assert_eq!(first[0].estimate, second[0].estimate);
        assert_eq!(first[0].estimate.value.to_bits(), second[0].estimate.value.to_bits());
    }

    #[test]
    fn two_entries_give_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let rows = tabulate(&[request(0.5), request(1.0)], dir.path()).unwrap();
        let csv = table_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "n,alpha1,a1,drift_id,S1,S2,delta,R,value,stderr");
        assert!(lines[1].starts_with("1,1,0.5,\"lin(5e-1)\",0,1,0.0625,500,"));
    }

    #[test]
    fn stale_or_corrupt_entries_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let req = request(0.5);
        let rows = tabulate(&[req.clone()], dir.path()).unwrap();
        let path = dir.path().join(format!("{}.json", rows[0].key));
        let text = fs::read_to_string(&path).unwrap();
        let stale = text.replace(&format!("\"schema_version\": {SCHEMA_VERSION}"), "\"schema_version\": 0");
        assert_ne!(stale, text);
        fs::write(&path, stale).unwrap();
        let again = tabulate(&[req.clone()], dir.path()).unwrap();
        assert!(!again[0].from_cache);
        assert_eq!(again[0].estimate, rows[0].estimate);
        fs::write(&path, "{ not json").unwrap();
        let again = tabulate(&[req], dir.path()).unwrap();
        assert!(!again[0].from_cache);
    }

    #[test]
    fn keys_depend_on_every_input() {
        let base = request(0.5);
        let mut other = base.clone();
        other.opts = other.opts.with_seed(1);
        assert_ne!(base.key(), other.key());
        assert_ne!(base.key(), request(0.25).key());
        assert_eq!(base.key(), request(0.5).key());
    }
}
