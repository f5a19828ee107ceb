//! Dimensionality reduction from images to low-dimensional latents.

pub mod autoencoder;
pub mod latent_csv;
pub mod pca;

use serde::{Deserialize, Serialize};

use crate::{QelmError, Result};

pub use autoencoder::{
    ae_encode, fit_autoencoder, fit_autoencoder_matrix, Activation, AutoencoderConfig, AutoencoderModel,
    DenseLayer, TrainingMetadata,
};
pub use latent_csv::{import_latents, write_latents, LatentTable};
pub use pca::{fit_pca, fit_pca_matrix, image_matrix, pca_transform, PcaModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Pca,
    Autoencoder,
    Imported,
}

/// Reduced feature vector. Values from PCA and the autoencoder lie in
/// `[0, 1]`; imported values keep whatever range their file declares.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector {
    values: Vec<f64>,
    provenance: Provenance,
}

impl LatentVector {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(QelmError::Data(format!("latent component {i} is not finite")));
        }
        if provenance != Provenance::Imported {
            if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(QelmError::Data(format!(
                    "latent component {i} = {} outside [0, 1]",
                    values[i]
                )));
            }
        }
        Ok(Self { values, provenance })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Which reducer produced a latent set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Pca,
    Ae,
    /// Latents read from CSV files.
    Imported,
    /// Raw pixels, for amplitude encoding of full images.
    None,
}

impl ReductionKind {
    pub fn name(self) -> &'static str {
        match self {
            ReductionKind::Pca => "pca",
            ReductionKind::Ae => "ae",
            ReductionKind::Imported => "imported",
            ReductionKind::None => "none",
        }
    }
}

impl std::str::FromStr for ReductionKind {
    type Err = QelmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(ReductionKind::Pca),
            "ae" | "autoencoder" => Ok(ReductionKind::Ae),
            "imported" => Ok(ReductionKind::Imported),
            "none" | "raw" => Ok(ReductionKind::None),
            other => Err(QelmError::InvalidArgument(format!("unknown reduction `{other}`"))),
        }
    }
}

impl std::fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
