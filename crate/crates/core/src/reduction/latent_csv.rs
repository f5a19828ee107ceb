//! Externally produced latents.
//!
//! ```text
//! # d=4 range=[0,1]
//! 0.1,0.5,0.9,0.2,7
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{LatentVector, Provenance};
use crate::{QelmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LatentTable {
    pub latents: Vec<LatentVector>,
    pub labels: Vec<u8>,
    pub range: (f64, f64),
}

fn parse_header(line: &str) -> Result<(usize, f64, f64)> {
    let bad = || QelmError::Format(format!("latent CSV header `{line}` is not `# d=<d> range=[lo,hi]`"));
    let body = line.trim().strip_prefix('#').ok_or_else(bad)?;
    let mut d = None;
    let mut range = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("d=") {
            d = Some(v.parse::<usize>().map_err(|_| bad())?);
        } else if let Some(v) = tok.strip_prefix("range=") {
            let inner = v.strip_prefix('[').and_then(|v| v.strip_suffix(']')).ok_or_else(bad)?;
            let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(bad());
            }
            range = Some((lo, hi));
        }
    }
    let (lo, hi) = range.ok_or_else(bad)?;
    Ok((d.ok_or_else(bad)?, lo, hi))
}

pub fn parse_latents(text: &str, d: usize) -> Result<LatentTable> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| QelmError::Format("latent CSV is empty".into()))?;
    let (hd, lo, hi) = parse_header(header)?;
    if hd != d {
        return Err(QelmError::DimensionMismatch { expected: d, got: hd });
    }
    let mut latents = Vec::new();
    let mut labels = Vec::new();
    let mut clamped = 0usize;
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != d + 1 {
            return Err(QelmError::Format(format!(
                "line {lineno}: expected {} columns, found {}",
                d + 1,
                cells.len()
            )));
        }
        let mut values = Vec::with_capacity(d);
        for cell in &cells[..d] {
            let v: f64 = cell
                .parse()
                .map_err(|_| QelmError::Format(format!("line {lineno}: non-numeric cell `{cell}`")))?;
            if !v.is_finite() {
                return Err(QelmError::Format(format!("line {lineno}: non-finite cell `{cell}`")));
            }
            let c = v.clamp(lo, hi);
            if c != v {
                clamped += 1;
            }
            values.push(c);
        }
        let label = cells[d]
            .parse::<u8>()
            .map_err(|_| QelmError::Format(format!("line {lineno}: bad label `{}`", cells[d])))?;
        latents.push(LatentVector::new(values, Provenance::Imported)?);
        labels.push(label);
    }
    if clamped > 0 {
        log::warn!("clamped {clamped} latent values into [{lo}, {hi}]");
    }
    Ok(LatentTable {
        latents,
        labels,
        range: (lo, hi),
    })
}

pub fn import_latents(path: impl AsRef<Path>, d: usize) -> Result<LatentTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| QelmError::io(path, e))?;
    parse_latents(&text, d)
}

pub fn write_latents(
    path: impl AsRef<Path>,
    latents: &[LatentVector],
    labels: &[u8],
    range: (f64, f64),
) -> Result<()> {
    let path = path.as_ref();
    if latents.len() != labels.len() {
        return Err(QelmError::DimensionMismatch {
            expected: latents.len(),
            got: labels.len(),
        });
    }
    let d = latents.first().map_or(0, LatentVector::dim);
    let mut out = format!("# d={d} range=[{},{}]\n", range.0, range.1);
    for (z, y) in latents.iter().zip(labels) {
        for v in z.values() {
            write!(out, "{v},").expect("string write");
        }
        writeln!(out, "{y}").expect("string write");
    }
    std::fs::write(path, out).map_err(|e| QelmError::io(path, e))
}
