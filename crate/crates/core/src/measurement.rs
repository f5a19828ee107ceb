//! Computational-basis readout.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::encoding::StateVector;
use crate::{QelmError, Result};

/// Accepted deviation of `‖ψ‖²` from one before renormalizing.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "shots")]
pub enum MeasurementMode {
    #[default]
    Exact,
    Shots(u64),
}

/// Outcome probabilities over the `2^N` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    probabilities: Vec<f64>,
    shots: MeasurementMode,
}

impl ProbabilityDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn into_probabilities(self) -> Vec<f64> {
        self.probabilities
    }

    pub fn mode(&self) -> MeasurementMode {
        self.shots
    }

    /// `max_k |F_p(k) - F_q(k)|` between cumulative distributions.
    pub fn kolmogorov_distance(&self, other: &[f64]) -> f64 {
        let (mut a, mut b, mut worst) = (0.0, 0.0, 0.0f64);
        for (p, q) in self.probabilities.iter().zip(other) {
            a += p;
            b += q;
            worst = worst.max((a - b).abs());
        }
        worst
    }
}

fn checked_norm(psi: &StateVector) -> Result<f64> {
    let n = psi.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(QelmError::InvalidArgument(format!(
            "state norm² {n} deviates from 1 by more than {NORM_TOL:e}"
        )));
    }
    Ok(n)
}

/// `p_k = |ψ_k|²`, renormalized when within tolerance of unit norm.
pub fn measure_exact(psi: &StateVector) -> Result<ProbabilityDistribution> {
    let norm = checked_norm(psi)?;
    Ok(ProbabilityDistribution {
        probabilities: psi.amplitudes().iter().map(|a| a.norm_sqr() / norm).collect(),
        shots: MeasurementMode::Exact,
    })
}

/// Multinomial sample of `shots` outcomes from `probs` via sequential
/// conditional binomials. Returns counts.
pub fn sample_counts(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == probs.len() - 1 || mass <= 0.0 {
            counts[k] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let c = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        counts[k] = c;
        remaining -= c;
        mass -= p;
    }
    counts
}

/// Empirical outcome frequencies from `shots` simulated projective measurements.
pub fn measure_shots(psi: &StateVector, shots: u64, seed: u64) -> Result<ProbabilityDistribution> {
    if shots < 1 {
        return Err(QelmError::InvalidArgument("shot count must be at least 1".into()));
    }
    let exact = measure_exact(psi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = sample_counts(exact.probabilities(), shots, &mut rng);
    Ok(ProbabilityDistribution {
        probabilities: counts.iter().map(|&c| c as f64 / shots as f64).collect(),
        shots: MeasurementMode::Shots(shots),
    })
}

/// In-place shot sampling of a probability feature matrix (samples as
/// columns). Column `j` uses a generator seeded from `seed + j`.
pub fn resample_columns(features: &mut DMatrix<f64>, shots: u64, seed: u64) -> Result<()> {
    if shots < 1 {
        return Err(QelmError::InvalidArgument("shot count must be at least 1".into()));
    }
    for j in 0..features.ncols() {
        let col: Vec<f64> = features.column(j).iter().copied().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(j as u64));
        let counts = sample_counts(&col, shots, &mut rng);
        for (k, c) in counts.into_iter().enumerate() {
            features[(k, j)] = c as f64 / shots as f64;
        }
    }
    Ok(())
}

const FEATURE_MAGIC: &[u8; 8] = b"QELMFEAT";
const FEATURE_VERSION: u32 = 1;

/// Binary feature block: `QELMFEAT`, version u32, rows u64, cols u64 (all
/// little-endian), then `rows·cols` f64 values in column-major order (one
/// sample per column).
pub fn write_feature_block(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| QelmError::io(path, e))?);
    let mut write = || -> std::io::Result<()> {
        w.write_all(FEATURE_MAGIC)?;
        w.write_all(&FEATURE_VERSION.to_le_bytes())?;
        w.write_all(&(m.nrows() as u64).to_le_bytes())?;
        w.write_all(&(m.ncols() as u64).to_le_bytes())?;
        for v in m.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    };
    write().map_err(|e| QelmError::io(path, e))
}

pub fn read_feature_block(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| QelmError::io(path, e))?;
    if bytes.len() < 28 || &bytes[..8] != FEATURE_MAGIC {
        return Err(QelmError::Format(format!("{} is not a feature block", path.display())));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FEATURE_VERSION {
        return Err(QelmError::Format(format!("unsupported feature block version {version}")));
    }
    let rows = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes")) as usize;
    let body = &bytes[28..];
    if body.len() != rows * cols * 8 {
        return Err(QelmError::Length(format!(
            "feature block body has {} bytes, expected {}",
            body.len(),
            rows * cols * 8
        )));
    }
    let vals = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    Ok(DMatrix::from_iterator(rows, cols, vals))
}

/// CSV with one sample per line and a `p0,...,p{K-1},label` header.
pub fn write_feature_csv(path: impl AsRef<Path>, m: &DMatrix<f64>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if labels.len() != m.ncols() {
        return Err(QelmError::DimensionMismatch {
            expected: m.ncols(),
            got: labels.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path).map_err(|e| QelmError::io(path, e))?);
    let mut write = || -> std::io::Result<()> {
        let header: Vec<String> = (0..m.nrows()).map(|k| format!("p{k}")).collect();
        writeln!(w, "{},label", header.join(","))?;
        for (j, label) in labels.iter().enumerate() {
            for v in m.column(j).iter() {
                write!(w, "{v},")?;
            }
            writeln!(w, "{label}")?;
        }
        w.flush()
    };
    write().map_err(|e| QelmError::io(path, e))
}

pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, Vec<u8>)> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| QelmError::io(path, e))?;
    let mut lines = BufReader::new(f).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| QelmError::io(path, e))?
        .ok_or_else(|| QelmError::Format("empty feature CSV".into()))?;
    let width = header.split(',').count() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| QelmError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width + 1 {
            return Err(QelmError::Format(format!(
                "line {}: expected {} cells, found {}",
                lineno + 2,
                width + 1,
                cells.len()
            )));
        }
        for c in &cells[..width] {
            values.push(c.trim().parse::<f64>().map_err(|_| {
                QelmError::Format(format!("line {}: non-numeric cell `{c}`", lineno + 2))
            })?);
        }
        labels.push(cells[width].trim().parse::<u8>().map_err(|_| {
            QelmError::Format(format!("line {}: bad label `{}`", lineno + 2, cells[width]))
        })?);
    }
    Ok((DMatrix::from_vec(width, labels.len(), values), labels))
}
