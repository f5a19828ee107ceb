//! Result reports: the row CSV, a JSON summary and one gnuplot-ready
//! accuracy-vs-qubits series per group.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::results::{write_results_csv, ResultRow};
use crate::{QelmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupKey {
    #[default]
    Reduction,
    Encoding,
    Hamiltonian,
    Dataset,
}

impl GroupKey {
    pub fn name(self) -> &'static str {
        match self {
            GroupKey::Reduction => "reduction",
            GroupKey::Encoding => "encoding",
            GroupKey::Hamiltonian => "hamiltonian",
            GroupKey::Dataset => "dataset",
        }
    }

    /// Group label of a row. Classical baselines form their own groups.
    pub fn label(self, row: &ResultRow) -> String {
        if let Some(rest) = row.fingerprint.strip_prefix("classical-") {
            let kind = rest.split('-').next().unwrap_or("baseline");
            return format!("classical-{kind}");
        }
        match self {
            GroupKey::Reduction => row.reduction.clone(),
            GroupKey::Encoding => row.encoding.clone(),
            GroupKey::Hamiltonian => row.hamiltonian.clone(),
            GroupKey::Dataset => row.dataset.clone(),
        }
    }
}

impl FromStr for GroupKey {
    type Err = QelmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduction" => Ok(GroupKey::Reduction),
            "encoding" => Ok(GroupKey::Encoding),
            "hamiltonian" => Ok(GroupKey::Hamiltonian),
            "dataset" => Ok(GroupKey::Dataset),
            other => Err(QelmError::InvalidArgument(format!("unknown group key `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub n_qubits: usize,
    pub runs: usize,
    pub mean_test_acc: f64,
    pub std_test_acc: f64,
    pub mean_train_acc: f64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub rows: usize,
    pub group_by: &'static str,
    pub best_fingerprint: String,
    pub best_test_acc: f64,
    pub groups: BTreeMap<String, Vec<SeriesPoint>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub series: Vec<PathBuf>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Rows grouped by label, then by qubit count, with per-point mean and
/// sample standard deviation over runs (seeds).
pub fn summarize(rows: &[ResultRow], key: GroupKey) -> Result<ReportSummary> {
    let best = rows
        .iter()
        .max_by(|a, b| a.test_acc.total_cmp(&b.test_acc))
        .ok_or_else(|| QelmError::InvalidArgument("cannot report on zero rows".into()))?;
    let mut buckets: BTreeMap<String, BTreeMap<usize, Vec<&ResultRow>>> = BTreeMap::new();
    for r in rows {
        buckets
            .entry(key.label(r))
            .or_default()
            .entry(r.n_qubits)
            .or_default()
            .push(r);
    }
    let groups = buckets
        .into_iter()
        .map(|(label, by_n)| {
            let points = by_n
                .into_iter()
                .map(|(n, rs)| {
                    let test: Vec<f64> = rs.iter().map(|r| r.test_acc).collect();
                    let train: Vec<f64> = rs.iter().map(|r| r.train_acc).collect();
                    let (mean_test_acc, std_test_acc) = mean_std(&test);
                    SeriesPoint {
                        n_qubits: n,
                        runs: rs.len(),
                        mean_test_acc,
                        std_test_acc,
                        mean_train_acc: mean_std(&train).0,
                        seeds: rs.iter().map(|r| r.seed).collect(),
                    }
                })
                .collect();
            (label, points)
        })
        .collect();
    Ok(ReportSummary {
        rows: rows.len(),
        group_by: key.name(),
        best_fingerprint: best.fingerprint.clone(),
        best_test_acc: best.test_acc,
        groups,
    })
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Write `results.csv`, `summary.json` and `series-<group>.dat` into `dir`.
/// Output depends only on `rows` and `key`, so re-running is byte-identical.
pub fn emit_report(rows: &[ResultRow], dir: impl AsRef<Path>, key: GroupKey) -> Result<ReportFiles> {
    let dir = dir.as_ref();
    let summary = summarize(rows, key)?;
    std::fs::create_dir_all(dir).map_err(|e| QelmError::io(dir, e))?;

    let csv = dir.join("results.csv");
    write_results_csv(&csv, rows)?;

    let summary_path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    std::fs::write(&summary_path, json).map_err(|e| QelmError::io(&summary_path, e))?;

    let mut series = Vec::new();
    for (label, points) in &summary.groups {
        let mut text = format!("# {} = {label}\n# n_qubits mean_test_acc std_test_acc mean_train_acc runs\n", key.name());
        for p in points {
            writeln!(
                text,
                "{} {:.6} {:.6} {:.6} {}",
                p.n_qubits, p.mean_test_acc, p.std_test_acc, p.mean_train_acc, p.runs
            )
            .expect("string write");
        }
        let path = dir.join(format!("series-{}.dat", file_stem(label)));
        std::fs::write(&path, text).map_err(|e| QelmError::io(&path, e))?;
        series.push(path);
    }
    Ok(ReportFiles {
        csv,
        summary: summary_path,
        series,
    })
}
