use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{QelmError, Result};

pub const RESULTS_HEADER: &str =
    "fingerprint,dataset,reduction,encoding,hamiltonian,n_qubits,seed,train_acc,test_acc,wall_s";

/// One sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub fingerprint: String,
    pub dataset: String,
    pub reduction: String,
    pub encoding: String,
    pub hamiltonian: String,
    pub n_qubits: usize,
    pub seed: u64,
    pub train_acc: f64,
    pub test_acc: f64,
    pub wall_s: f64,
}

impl ResultRow {
    /// CSV line without the trailing newline. Accuracies use the shortest
    /// representation that round-trips exactly.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.3}",
            self.fingerprint,
            self.dataset,
            self.reduction,
            self.encoding,
            self.hamiltonian,
            self.n_qubits,
            self.seed,
            self.train_acc,
            self.test_acc,
            self.wall_s
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let c: Vec<&str> = line.trim().split(',').collect();
        if c.len() != 10 {
            return Err(QelmError::Format(format!(
                "result row has {} fields, expected 10: `{line}`",
                c.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            c[i].parse()
                .map_err(|_| QelmError::Format(format!("result field `{}` is not numeric", c[i])))
        };
        let int = |i: usize| -> Result<u64> {
            c[i].parse()
                .map_err(|_| QelmError::Format(format!("result field `{}` is not an integer", c[i])))
        };
        Ok(Self {
            fingerprint: c[0].into(),
            dataset: c[1].into(),
            reduction: c[2].into(),
            encoding: c[3].into(),
            hamiltonian: c[4].into(),
            n_qubits: int(5)? as usize,
            seed: int(6)?,
            train_acc: num(7)?,
            test_acc: num(8)?,
            wall_s: num(9)?,
        })
    }

    /// Equal in every field except wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self { wall_s: 0.0, ..self.clone() } == Self { wall_s: 0.0, ..other.clone() }
    }
}

pub fn write_results_csv(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| QelmError::io(path, e))
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| QelmError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == RESULTS_HEADER => {}
        Some(h) => return Err(QelmError::Format(format!("unexpected results header `{h}`"))),
        None => return Ok(Vec::new()),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(ResultRow::from_csv)
        .collect()
}

/// Append one row, writing the header first when the file is new or empty.
pub fn append_result(path: impl AsRef<Path>, row: &ResultRow) -> Result<()> {
    let path = path.as_ref();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| QelmError::io(path, e))?;
    let empty = f.metadata().map_err(|e| QelmError::io(path, e))?.len() == 0;
    let mut line = String::new();
    if empty {
        line.push_str(RESULTS_HEADER);
        line.push('\n');
    }
    line.push_str(&row.to_csv());
    line.push('\n');
    f.write_all(line.as_bytes()).map_err(|e| QelmError::io(path, e))?;
    f.sync_data().map_err(|e| QelmError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            fingerprint: "abc".into(),
            dataset: "mnist".into(),
            reduction: "pca".into(),
            encoding: "dense_angle".into(),
            hamiltonian: "h2".into(),
            n_qubits: 8,
            seed: 2,
            train_acc: 0.1 + 0.2,
            test_acc: 0.9125,
            wall_s: 12.3456,
        }
    }

    #[test]
    fn csv_round_trip_is_exact_on_accuracies() {
        let r = row();
        let back = ResultRow::from_csv(&r.to_csv()).unwrap();
        assert_eq!(back.train_acc.to_bits(), r.train_acc.to_bits());
        assert!(back.same_outcome(&r));
        assert_eq!(back.wall_s, 12.346);
    }

    #[test]
    fn append_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        append_result(&p, &row()).unwrap();
        append_result(&p, &row()).unwrap();
        let rows = read_results_csv(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(std::fs::read_to_string(&p).unwrap().starts_with(RESULTS_HEADER));
    }
}
