use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{LatentVector, Provenance};
use crate::data::LabeledDataset;
use crate::{QelmError, Result};

/// Principal components of mean-centred training data, plus the per-dimension
/// train-set projection range used to rescale latents into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// `d × F`, orthonormal rows, descending variance.
    pub components: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
    pub latent_lo: Vec<f64>,
    pub latent_hi: Vec<f64>,
}

/// Stack the dataset images as columns (`F × n`).
pub fn image_matrix(ds: &LabeledDataset) -> Result<DMatrix<f64>> {
    let f = ds
        .feature_dim()
        .ok_or_else(|| QelmError::InvalidArgument("empty dataset".into()))?;
    let mut m = DMatrix::zeros(f, ds.len());
    for (j, img) in ds.images().iter().enumerate() {
        if img.len() != f {
            return Err(QelmError::DimensionMismatch {
                expected: f,
                got: img.len(),
            });
        }
        m.column_mut(j).copy_from_slice(img.as_slice());
    }
    Ok(m)
}

pub fn fit_pca(train: &LabeledDataset, d: usize) -> Result<PcaModel> {
    fit_pca_matrix(&image_matrix(train)?, d)
}

/// Fit on a `F × n` sample matrix. Components are the top-`d` covariance
/// eigenvectors; each is signed so its largest-magnitude entry is positive.
pub fn fit_pca_matrix(x: &DMatrix<f64>, d: usize) -> Result<PcaModel> {
    let (f, n) = x.shape();
    if d == 0 || d > f {
        return Err(QelmError::InvalidArgument(format!(
            "PCA dimension {d} out of range 1..={f}"
        )));
    }
    if n < d + 1 {
        return Err(QelmError::InvalidArgument(format!(
            "PCA with d={d} needs at least {} samples, got {n}",
            d + 1
        )));
    }
    let mean = x.column_mean();
    let mut centred = x.clone();
    for mut col in centred.column_iter_mut() {
        col -= &mean;
    }
    let cov = (&centred * centred.transpose()) / (n as f64 - 1.0);
    let eig = SymmetricEigen::try_new(cov, f64::EPSILON, 0)
        .ok_or_else(|| QelmError::Linalg("covariance eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = DMatrix::zeros(d, f);
    let mut explained_variance = Vec::with_capacity(d);
    for (row, &k) in order.iter().take(d).enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for c in 0..f {
            components[(row, c)] = sign * v[c];
        }
        explained_variance.push(eig.eigenvalues[k].max(0.0));
    }

    let proj = &components * &centred;
    let latent_lo = proj.row_iter().map(|r| r.min()).collect();
    let latent_hi = proj.row_iter().map(|r| r.max()).collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        latent_lo,
        latent_hi,
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    /// `components · (x - mean)` without rescaling.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(QelmError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let centred = DVector::from_column_slice(x) - &self.mean;
        Ok((&self.components * centred).iter().copied().collect())
    }

    /// Projection min-max rescaled per dimension with train statistics
    /// (clamped to `[0, 1]`).
    pub fn transform(&self, x: &[f64]) -> Result<LatentVector> {
        let raw = self.project(x)?;
        let values = raw
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let span = self.latent_hi[k] - self.latent_lo[k];
                if span > 0.0 {
                    ((v - self.latent_lo[k]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        LatentVector::new(values, Provenance::Pca)
    }

    /// `mean + componentsᵀ · projection`.
    pub fn reconstruct(&self, projection: &[f64]) -> DVector<f64> {
        &self.mean + self.components.transpose() * DVector::from_column_slice(projection)
    }

    /// Mean squared reconstruction error over the columns of `x`.
    pub fn reconstruction_mse(&self, x: &DMatrix<f64>) -> Result<f64> {
        let mut total = 0.0;
        for col in x.column_iter() {
            let p = self.project(col.as_slice())?;
            total += (self.reconstruct(&p) - col).norm_squared();
        }
        Ok(total / (x.len().max(1)) as f64)
    }
}

pub fn pca_transform(model: &PcaModel, x: &[f64]) -> Result<LatentVector> {
    model.transform(x)
}
