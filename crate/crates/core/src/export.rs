//! CSV and JSON artifacts. Every file is written to a temporary sibling and
//! renamed into place; JSON documents carry `schema_version`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bernoulli::{ConvergenceRow, TrialRun};
use crate::calibrate::{CalibrationResult, SweepKind, SweepRow};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::simulator::{RctComparison, SimResult};
use crate::solver::{BoundarySolution, LatticeOutcome, TruncationReport};
use crate::stats::Histogram;

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(res?)
}

/// JSON document with a version stamp and a kind tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema_version: u32,
    pub kind: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Document<T> {
    pub fn new(kind: &str, body: T) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            body,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, body: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Document::new(kind, body))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Reads a document, rejecting other kinds and newer schema versions.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, kind: &str) -> Result<T> {
    let doc: Document<T> = serde_json::from_str(&fs::read_to_string(path)?)?;
    if doc.kind != kind || doc.schema_version > SCHEMA_VERSION {
        return Err(Error::Mismatch(format!(
            "{} holds `{}` schema {}, expected `{kind}` schema ≤ {SCHEMA_VERSION}",
            path.display(),
            doc.kind,
            doc.schema_version
        )));
    }
    Ok(doc.body)
}

fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub rho: f64,
    pub t: f64,
    pub b_plus: f64,
    pub b_minus: f64,
}

pub fn boundary_rows(sol: &BoundarySolution) -> impl Iterator<Item = BoundaryRow> + '_ {
    (0..sol.rho_grid.len()).map(|i| BoundaryRow {
        rho: sol.rho_grid[i],
        t: sol.t_grid[i],
        b_plus: sol.b_plus[i],
        b_minus: sol.b_minus[i],
    })
}

pub fn write_boundaries_csv(path: &Path, sol: &BoundarySolution) -> Result<()> {
    write_csv(path, boundary_rows(sol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
}

pub fn write_histogram_csv(path: &Path, h: &Histogram) -> Result<()> {
    write_csv(
        path,
        h.bins().map(|(bin_left, bin_right, count)| HistogramRow {
            bin_left,
            bin_right,
            count,
        }),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub scenario: Scenario,
    pub lambda: f64,
    pub truncation: TruncationReport,
    pub lattice: LatticeOutcome,
    pub solution: BoundarySolution,
}

/// Calibration record; doubles as the solution cache for later commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub scenario: Scenario,
    pub v0_multiple: Option<f64>,
    pub truncation: TruncationReport,
    pub result: CalibrationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: Scenario,
    pub lambda: f64,
    pub truncation: TruncationReport,
    pub result: SimResult,
    pub rct: RctComparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub value: f64,
    pub v0: f64,
    pub lambda_star: f64,
    pub mean_tau: f64,
    pub median_tau: f64,
    pub welfare: f64,
    pub approval_rate: f64,
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(r: &SweepRow) -> Self {
        SweepCsvRow {
            value: r.value,
            v0: r.v0,
            lambda_star: r.lambda_star,
            mean_tau: r.mean_tau,
            median_tau: r.median_tau,
            welfare: r.welfare,
            approval_rate: r.approval_rate,
        }
    }
}

/// Writes `sweep_<kind>.csv` and one boundary file per value under
/// `sweep_<kind>/`. Returns the summary path.
pub fn write_sweep(dir: &Path, kind: SweepKind, rows: &[SweepRow]) -> Result<PathBuf> {
    let label = kind.label();
    let summary = dir.join(format!("sweep_{label}.csv"));
    write_csv(&summary, rows.iter().map(SweepCsvRow::from))?;
    for (i, r) in rows.iter().enumerate() {
        let p = dir
            .join(format!("sweep_{label}"))
            .join(format!("boundaries_{i:02}_{}.csv", r.value));
        write_boundaries_csv(&p, &r.sol)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCsvRow {
    pub v0_multiple: Option<f64>,
    pub v0: f64,
    pub lambda_star: f64,
    pub achieved_welfare: f64,
    pub welfare_stderr: f64,
    pub iterations: usize,
    pub t_star: Option<f64>,
}

pub fn write_calibration_csv(path: &Path, rows: &[CalibrationReport]) -> Result<()> {
    write_csv(
        path,
        rows.iter().map(|r| CalibrationCsvRow {
            v0_multiple: r.v0_multiple,
            v0: r.result.v0,
            lambda_star: r.result.lambda_star,
            achieved_welfare: r.result.achieved_welfare,
            welfare_stderr: r.result.welfare_stderr,
            iterations: r.result.iterations,
            t_star: r.truncation.t_star,
        }),
    )
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    write_csv(path, rows.iter())
}

/// One JSON document per line.
pub fn write_trace_jsonl(path: &Path, runs: &[TrialRun]) -> Result<()> {
    let mut out = Vec::new();
    for r in runs {
        serde_json::to_writer(&mut out, &Document::new("bernoulli_trial", r))?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RctBaseline {
    pub m0: f64,
    pub varrho0: f64,
    pub sigma: f64,
    pub alpha: f64,
    /// Standard deviation of the posterior mean at `t = 1`.
    pub nu: f64,
    pub v0_star: f64,
    pub c: f64,
    pub b: f64,
    /// `C·n`, when structural costs are given.
    pub trial_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RctReport {
    pub scenario: String,
    #[serde(flatten)]
    pub baseline: RctBaseline,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.json");
        let row = |t| BoundaryRow {
            rho: 0.5,
            t,
            b_plus: 0.25,
            b_minus: -1.0,
        };
        write_json(&p, "thing", &row(1.5)).unwrap();
        write_json(&p, "thing", &row(3.25)).unwrap();
        let v: BoundaryRow = read_json(&p, "thing").unwrap();
        assert_eq!(v, row(3.25));
        assert!(fs::read_to_string(&p).unwrap().contains("\"schema_version\": 1"));
        let names: Vec<_> = fs::read_dir(p.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
        assert!(matches!(read_json::<BoundaryRow>(&p, "other"), Err(Error::Mismatch(_))));
    }

    #[test]
    fn histogram_csv_has_header_and_dot_decimals() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        let h = Histogram::from_data(&[0.1, 0.2, 0.9], 2);
        write_histogram_csv(&p, &h).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("bin_left,bin_right,count"));
        assert_eq!(lines.count(), 2);
        assert!(!text.contains(';'));
    }
}
