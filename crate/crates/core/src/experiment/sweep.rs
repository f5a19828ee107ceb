//! Grid sweeps.
//!
//! A sweep file is an ordinary config plus an `[axes]` table whose entries
//! are arrays:
//!
//! ```toml
//! n_qubits = 6
//! [axes]
//! n_qubits = [5, 6, 7]
//! reduction = ["pca", "ae"]
//! ```
//!
//! Cells are the cartesian product of the axes (keys in sorted order, the
//! last key varying fastest). Each finished cell is appended to
//! `<output_dir>/results.csv`; cells whose fingerprint is already present are
//! skipped, so an interrupted sweep resumes where it stopped. Failed cells go
//! to `<output_dir>/failures.csv` and are retried on the next run.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::{apply_overrides, read_table, ExperimentConfig};
use super::pipeline::run_single;
use super::results::{append_result, read_results_csv, ResultRow};
use crate::{QelmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: toml::Table,
    pub axes: Vec<(String, Vec<toml::Value>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell: String,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Rows in the results file after the sweep, in file order.
    pub rows: Vec<ResultRow>,
    pub ran: usize,
    pub skipped: usize,
    pub failures: Vec<CellFailure>,
}

impl SweepSpec {
    pub fn from_table(mut table: toml::Table) -> Result<Self> {
        let axes = match table.remove("axes") {
            None => Vec::new(),
            Some(toml::Value::Table(t)) => t
                .into_iter()
                .map(|(k, v)| match v {
                    toml::Value::Array(a) if !a.is_empty() => Ok((k, a)),
                    _ => Err(QelmError::Config(format!("axis `{k}` must be a non-empty array"))),
                })
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(QelmError::Config("`axes` must be a table".into())),
        };
        if axes.is_empty() {
            return Err(QelmError::Config("sweep needs at least one axis".into()));
        }
        Ok(Self { base: table, axes })
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let mut spec = Self::from_table(read_table(path)?)?;
        apply_overrides(&mut spec.base, overrides);
        Ok(spec)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell tables in mixed-radix order.
    pub fn cells(&self) -> Vec<toml::Table> {
        (0..self.len())
            .map(|mut idx| {
                let mut t = self.base.clone();
                for (k, vals) in self.axes.iter().rev() {
                    t.insert(k.clone(), vals[idx % vals.len()].clone());
                    idx /= vals.len();
                }
                t
            })
            .collect()
    }

    pub fn configs(&self) -> Vec<Result<ExperimentConfig>> {
        self.cells().into_iter().map(ExperimentConfig::from_table).collect()
    }

    /// Where results land: the base config's output directory.
    pub fn output_dir(&self) -> Result<PathBuf> {
        let mut t = self.base.clone();
        for (k, v) in &self.axes {
            t.insert(k.clone(), v[0].clone());
        }
        Ok(ExperimentConfig::from_table(t)?.output_dir)
    }
}

fn describe(cell: &toml::Table, axes: &[(String, Vec<toml::Value>)]) -> String {
    axes.iter()
        .map(|(k, _)| format!("{k}={}", cell.get(k).map(|v| v.to_string()).unwrap_or_default()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn record_failure(dir: &Path, f: &CellFailure) -> Result<()> {
    let path = dir.join("failures.csv");
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| QelmError::io(&path, e))?;
    let fresh = file.metadata().map(|m| m.len() == 0).unwrap_or(true);
    let error = f.error.split_whitespace().collect::<Vec<_>>().join(" ").replace('"', "'");
    let mut line = if fresh { String::from("cell,error\n") } else { String::new() };
    line.push_str(&format!("{},\"{error}\"\n", f.cell));
    file.write_all(line.as_bytes()).map_err(|e| QelmError::io(&path, e))
}

/// Run every cell not yet present in the results file.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let dir = spec.output_dir()?;
    std::fs::create_dir_all(&dir).map_err(|e| QelmError::io(&dir, e))?;
    let results = dir.join("results.csv");
    let mut done: HashSet<String> = if results.exists() {
        read_results_csv(&results)?.into_iter().map(|r| r.fingerprint).collect()
    } else {
        HashSet::new()
    };
    let mut out = SweepOutcome::default();
    let cells = spec.cells();
    let total = cells.len();
    for (i, cell) in cells.into_iter().enumerate() {
        let label = describe(&cell, &spec.axes);
        let cfg = match ExperimentConfig::from_table(cell) {
            Ok(c) => c,
            Err(e) => {
                let f = CellFailure {
                    cell: label,
                    error: e.to_string(),
                };
                log::error!("cell {}/{total} invalid: {}", i + 1, f.error);
                record_failure(&dir, &f)?;
                out.failures.push(f);
                continue;
            }
        };
        let fp = cfg.fingerprint();
        if done.contains(&fp) {
            out.skipped += 1;
            continue;
        }
        log::info!("cell {}/{total} [{label}] {fp}", i + 1);
        match run_single(&cfg) {
            Ok(outcome) => {
                append_result(&results, &outcome.row)?;
                done.insert(fp);
                out.ran += 1;
            }
            Err(e) => {
                let f = CellFailure {
                    cell: format!("{fp} {label}"),
                    error: e.to_string(),
                };
                log::error!("cell {}/{total} failed: {}", i + 1, f.error);
                record_failure(&dir, &f)?;
                out.failures.push(f);
            }
        }
    }
    out.rows = if results.exists() {
        read_results_csv(&results)?
    } else {
        Vec::new()
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_product_order() {
        let t: toml::Table = "n_qubits = 4\n[axes]\nn_qubits = [5, 6]\nreduction = [\"pca\", \"ae\", \"none\"]\n"
            .parse()
            .unwrap();
        let s = SweepSpec::from_table(t).unwrap();
        assert_eq!(s.len(), 6);
        let cells = s.cells();
        let pairs: Vec<(i64, String)> = cells
            .iter()
            .map(|c| {
                (
                    c["n_qubits"].as_integer().unwrap(),
                    c["reduction"].as_str().unwrap().to_string(),
                )
            })
            .collect();
        assert_eq!(pairs[0], (5, "pca".into()));
        assert_eq!(pairs[1], (5, "ae".into()));
        assert_eq!(pairs[3], (6, "pca".into()));
    }

    #[test]
    fn axes_required() {
        let t: toml::Table = "n_qubits = 4".parse().unwrap();
        assert!(SweepSpec::from_table(t).is_err());
        let t: toml::Table = "[axes]\nn_qubits = []".parse().unwrap();
        assert!(SweepSpec::from_table(t).is_err());
    }
}
