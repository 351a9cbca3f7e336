//! CSV schemas and atomic file output.
//!
//! Floats are written in shortest round-trip scientific notation so a file
//! read back reproduces the in-memory values exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agd::{IterationStats, TrajectoryRecord, Violation};
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 12] = [
    "iter",
    "f",
    "rel_loss",
    "sigma1_x",
    "sigmar_x",
    "sigma1_y",
    "sigmar_y",
    "grad_norm_x",
    "grad_norm_y",
    "balance",
    "colspan_leak",
    "envelope",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "experiment",
    "scheme",
    "sigma_r",
    "seed",
    "eta",
    "beta",
    "iters_to_target",
    "final_rel_loss",
    "monitor_violations",
];

pub const VIOLATION_HEADER: [&str; 8] = [
    "experiment",
    "scheme",
    "sigma_r",
    "seed",
    "iteration",
    "monitor",
    "measured",
    "bound",
];

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One row of a summary CSV. `seed` is the trial's RNG stream id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub scheme: String,
    pub sigma_r: f64,
    pub seed: u64,
    pub eta: f64,
    pub beta: Option<f64>,
    pub iters_to_target: Option<usize>,
    pub final_rel_loss: f64,
    pub monitor_violations: usize,
}

impl SummaryRow {
    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.scheme.clone(),
            fmt_f64(self.sigma_r),
            self.seed.to_string(),
            fmt_f64(self.eta),
            fmt_opt(self.beta.map(fmt_f64)),
            fmt_opt(self.iters_to_target),
            fmt_f64(self.final_rel_loss),
            self.monitor_violations.to_string(),
        ]
    }
}

/// Trajectory row as read back from disk.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub f: f64,
    pub rel_loss: f64,
    pub sigma1_x: f64,
    pub sigmar_x: f64,
    pub sigma1_y: f64,
    pub sigmar_y: f64,
    pub grad_norm_x: f64,
    pub grad_norm_y: f64,
    pub balance: f64,
    pub colspan_leak: f64,
    pub envelope: Option<f64>,
}

fn stats_fields(s: &IterationStats) -> Vec<String> {
    vec![
        s.t.to_string(),
        fmt_f64(s.f),
        fmt_f64(s.rel_loss),
        fmt_f64(s.sigma1_x),
        fmt_f64(s.sigmar_x),
        fmt_f64(s.sigma1_y),
        fmt_f64(s.sigmar_y),
        fmt_f64(s.grad_norm_x),
        fmt_f64(s.grad_norm_y),
        fmt_f64(s.balance),
        fmt_f64(s.colspan_leak),
        fmt_opt(s.envelope.map(fmt_f64)),
    ]
}

pub(crate) fn to_csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Csv {
        path: PathBuf::from("<memory>"),
        source: e,
    };
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| Error::Csv {
        path: PathBuf::from("<memory>"),
        source: e.into_error().into(),
    })
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> Result<Vec<u8>> {
    to_csv_bytes(&TRAJECTORY_HEADER, record.stats.iter().map(stats_fields))
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    to_csv_bytes(&SUMMARY_HEADER, rows.iter().map(SummaryRow::fields))
}

/// A violation tagged with the trial it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedViolation {
    pub experiment: String,
    pub scheme: String,
    pub sigma_r: f64,
    pub seed: u64,
    pub violation: Violation,
}

pub fn violations_csv(rows: &[TaggedViolation]) -> Result<Vec<u8>> {
    to_csv_bytes(
        &VIOLATION_HEADER,
        rows.iter().map(|v| {
            vec![
                v.experiment.clone(),
                v.scheme.clone(),
                fmt_f64(v.sigma_r),
                v.seed.to_string(),
                v.violation.iteration.to_string(),
                v.violation.monitor.name().to_string(),
                fmt_f64(v.violation.measured),
                fmt_f64(v.violation.bound),
            ]
        }),
    )
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let wrap = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(wrap)?;
    rdr.deserialize().map(|r| r.map_err(wrap)).collect()
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    read_rows(path)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

/// Iteration count and final loss recomputed from a trajectory file.
pub fn summarize_trajectory(rows: &[TrajectoryRow], target: f64) -> Option<(Option<usize>, f64)> {
    let last = rows.last()?;
    let hit = if target > 0.0 {
        rows.iter().find(|r| r.rel_loss <= target).map(|r| r.iter)
    } else {
        None
    };
    Some((hit, last.rel_loss))
}
