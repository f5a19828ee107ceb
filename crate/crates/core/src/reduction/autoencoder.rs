//! Dense autoencoder `F → 256w → 64w → d → 64w → 256w → F`.
//!
//! Hidden layers use ReLU; the latent and output layers use the sigmoid, so
//! latents lie in `(0, 1)`. Trained with Adam on mean binary cross-entropy.
//! `w` is a width multiplier on the hidden layers.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::{LatentVector, Provenance};
use crate::data::LabeledDataset;
use crate::optim::{AdamConfig, AdamState};
use crate::reduction::pca::image_matrix;
use crate::{QelmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply(self, z: &mut DMatrix<f64>) {
        match self {
            Activation::Relu => z.apply(|v| *v = v.max(0.0)),
            Activation::Sigmoid => z.apply(|v| *v = sigmoid(*v)),
            Activation::Linear => {}
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Stable `-[y log σ(z) + (1-y) log(1-σ(z))] = softplus(z) - y z`.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `out × in`.
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    fn glorot(input: usize, output: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (input + output) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("valid range");
        Self {
            weights: DMatrix::from_fn(output, input, |_, _| dist.sample(rng)),
            biases: DVector::zeros(output),
            activation,
        }
    }

    fn pre_activation(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = &self.weights * x;
        for mut col in z.column_iter_mut() {
            col += &self.biases;
        }
        z
    }

    fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = self.pre_activation(x);
        self.activation.apply(&mut z);
        z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    pub latent_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub width: f64,
    /// Explicit hidden widths `(outer, inner)`; overrides `width`.
    pub hidden: Option<(usize, usize)>,
    pub seed: u64,
}

impl AutoencoderConfig {
    pub fn new(latent_dim: usize, epochs: usize, seed: u64) -> Self {
        Self {
            latent_dim,
            epochs,
            batch_size: 128,
            adam: AdamConfig::default(),
            width: 1.0,
            hidden: None,
            seed,
        }
    }

    /// Layer widths from input to output.
    pub fn layer_sizes(&self, input: usize) -> Vec<usize> {
        let (h1, h2) = self.hidden.unwrap_or((
            ((256.0 * self.width).round() as usize).max(1),
            ((64.0 * self.width).round() as usize).max(1),
        ));
        vec![input, h1, h2, self.latent_dim, h2, h1, input]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub epochs: usize,
    /// Mean BCE over the training set after the last epoch.
    pub final_loss: f64,
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub encoder: Vec<DenseLayer>,
    pub decoder: Vec<DenseLayer>,
    pub latent_dim: usize,
    pub config: AutoencoderConfig,
    pub metadata: TrainingMetadata,
}

impl AutoencoderModel {
    fn new_untrained(input: usize, cfg: &AutoencoderConfig) -> Self {
        let sizes = cfg.layer_sizes(input);
        let acts = [
            Activation::Relu,
            Activation::Relu,
            Activation::Sigmoid,
            Activation::Relu,
            Activation::Relu,
            Activation::Sigmoid,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let layers: Vec<_> = sizes
            .windows(2)
            .zip(acts)
            .map(|(w, a)| DenseLayer::glorot(w[0], w[1], a, &mut rng))
            .collect();
        let (enc, dec) = layers.split_at(3);
        Self {
            encoder: enc.to_vec(),
            decoder: dec.to_vec(),
            latent_dim: cfg.latent_dim,
            config: cfg.clone(),
            metadata: TrainingMetadata {
                epochs: 0,
                final_loss: f64::NAN,
                epoch_losses: Vec::new(),
            },
        }
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].weights.ncols()
    }

    fn layer_mut(&mut self, i: usize) -> &mut DenseLayer {
        let n_enc = self.encoder.len();
        if i < n_enc {
            &mut self.encoder[i]
        } else {
            &mut self.decoder[i - n_enc]
        }
    }

    fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.encoder.iter().chain(self.decoder.iter())
    }

    /// Latents (`d × n`) for a batch.
    pub fn encode_batch(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.input_dim() {
            return Err(QelmError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.nrows(),
            });
        }
        Ok(self.encoder.iter().fold(x.clone(), |h, l| l.forward(&h)))
    }

    /// Output logits (pre-sigmoid) from latents.
    fn decode_logits(&self, latent: &DMatrix<f64>) -> DMatrix<f64> {
        let (last, hidden) = self.decoder.split_last().expect("decoder has layers");
        let h = hidden.iter().fold(latent.clone(), |h, l| l.forward(&h));
        last.pre_activation(&h)
    }

    /// Reconstructed pixels in `(0, 1)` from latents.
    pub fn decode_batch(&self, latent: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if latent.nrows() != self.latent_dim {
            return Err(QelmError::DimensionMismatch {
                expected: self.latent_dim,
                got: latent.nrows(),
            });
        }
        let mut z = self.decode_logits(latent);
        Activation::Sigmoid.apply(&mut z);
        Ok(z)
    }

    pub fn encode(&self, x: &[f64]) -> Result<LatentVector> {
        let z = self.encode_batch(&DMatrix::from_column_slice(x.len(), 1, x))?;
        LatentVector::new(z.column(0).iter().copied().collect(), Provenance::Autoencoder)
    }

    /// Mean binary cross-entropy of encode→decode over the columns of `x`.
    pub fn reconstruction_loss(&self, x: &DMatrix<f64>) -> Result<f64> {
        const CHUNK: usize = 512;
        let mut total = 0.0;
        let mut start = 0;
        while start < x.ncols() {
            let len = CHUNK.min(x.ncols() - start);
            let xb = x.columns(start, len).into_owned();
            let z = self.decode_logits(&self.encode_batch(&xb)?);
            total += z
                .iter()
                .zip(xb.iter())
                .map(|(&zi, &yi)| bce_from_logit(zi, yi))
                .sum::<f64>();
            start += len;
        }
        Ok(total / x.len().max(1) as f64)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let doc = serde_json::json!({
            "format": "qelm-autoencoder",
            "version": 1,
            "layer_sizes": self.config.layer_sizes(self.input_dim()),
            "model": self,
        });
        std::fs::write(path, serde_json::to_string(&doc).expect("serializable"))
            .map_err(|e| QelmError::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| QelmError::io(path, e))?;
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| QelmError::Format(e.to_string()))?;
        if doc["format"] != "qelm-autoencoder" || doc["version"] != 1 {
            return Err(QelmError::Format("not a qelm-autoencoder v1 document".into()));
        }
        serde_json::from_value(doc["model"].clone()).map_err(|e| QelmError::Format(e.to_string()))
    }
}

/// One forward/backward pass on a batch; returns the summed BCE and
/// accumulates gradients (already divided by the element count).
fn backprop(
    model: &AutoencoderModel,
    x: &DMatrix<f64>,
    grads: &mut [(DMatrix<f64>, DVector<f64>)],
) -> f64 {
    let layers: Vec<&DenseLayer> = model.layers().collect();
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(x.clone());
    let mut out_logits = DMatrix::zeros(0, 0);
    for (i, layer) in layers.iter().enumerate() {
        let z = layer.pre_activation(acts.last().expect("input present"));
        if i == layers.len() - 1 {
            out_logits = z.clone();
        }
        let mut a = z;
        layer.activation.apply(&mut a);
        acts.push(a);
    }
    let scale = 1.0 / x.len() as f64;
    let loss: f64 = out_logits
        .iter()
        .zip(x.iter())
        .map(|(&z, &y)| bce_from_logit(z, y))
        .sum();
    // sigmoid + BCE: dL/dz = σ(z) - y
    let mut delta = (&acts[layers.len()] - x) * scale;
    for i in (0..layers.len()).rev() {
        let input = &acts[i];
        grads[i].0 = &delta * input.transpose();
        grads[i].1 = delta.column_sum();
        if i == 0 {
            break;
        }
        let mut back = layers[i].weights.tr_mul(&delta);
        let a = &acts[i];
        match layers[i - 1].activation {
            Activation::Relu => back.zip_apply(a, |d, av| {
                if av <= 0.0 {
                    *d = 0.0
                }
            }),
            Activation::Sigmoid => back.zip_apply(a, |d, av| *d *= av * (1.0 - av)),
            Activation::Linear => {}
        }
        delta = back;
    }
    loss
}

pub fn fit_autoencoder(train: &LabeledDataset, cfg: &AutoencoderConfig) -> Result<AutoencoderModel> {
    fit_autoencoder_matrix(&image_matrix(train)?, cfg)
}

/// Train on a `F × n` matrix with entries in `[0, 1]`. Deterministic for a
/// fixed seed.
pub fn fit_autoencoder_matrix(x: &DMatrix<f64>, cfg: &AutoencoderConfig) -> Result<AutoencoderModel> {
    if cfg.latent_dim == 0 {
        return Err(QelmError::InvalidArgument("latent dimension must be >= 1".into()));
    }
    if cfg.batch_size == 0 || cfg.width <= 0.0 || cfg.hidden.is_some_and(|(a, b)| a == 0 || b == 0) {
        return Err(QelmError::InvalidArgument("batch size and width must be positive".into()));
    }
    if x.ncols() == 0 {
        return Err(QelmError::InvalidArgument("cannot train on zero samples".into()));
    }
    let mut model = AutoencoderModel::new_untrained(x.nrows(), cfg);
    // Start the output layer at the per-pixel mean so early updates do not
    // push every sample's latent the same way.
    let out = model.decoder.last_mut().expect("decoder has layers");
    for (b, m) in out.biases.iter_mut().zip(x.column_mean().iter()) {
        let p = m.clamp(1e-3, 1.0 - 1e-3);
        *b = (p / (1.0 - p)).ln();
    }
    let mut states: Vec<(AdamState, AdamState)> = model
        .layers()
        .map(|l| (AdamState::new(l.weights.len()), AdamState::new(l.biases.len())))
        .collect();
    let mut grads: Vec<(DMatrix<f64>, DVector<f64>)> = model
        .layers()
        .map(|_| (DMatrix::zeros(0, 0), DVector::zeros(0)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_ae00);
    let mut order: Vec<usize> = (0..x.ncols()).collect();
    let mut step = 0u64;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select_columns(batch.iter());
            let loss = backprop(&model, &xb, &mut grads);
            if !loss.is_finite() {
                return Err(QelmError::Divergence(format!(
                    "autoencoder loss became non-finite at epoch {epoch}"
                )));
            }
            total += loss;
            step += 1;
            for (i, (g, (sw, sb))) in grads.iter().zip(states.iter_mut()).enumerate() {
                let layer = model.layer_mut(i);
                sw.update(&cfg.adam, step, layer.weights.as_mut_slice(), g.0.as_slice());
                sb.update(&cfg.adam, step, layer.biases.as_mut_slice(), g.1.as_slice());
            }
        }
        let mean = total / x.len() as f64;
        log::debug!("autoencoder epoch {epoch}: running BCE {mean:.5}");
        epoch_losses.push(mean);
    }
    let final_loss = model.reconstruction_loss(x)?;
    if !final_loss.is_finite() {
        return Err(QelmError::Divergence("final reconstruction loss is non-finite".into()));
    }
    model.metadata = TrainingMetadata {
        epochs: cfg.epochs,
        final_loss,
        epoch_losses,
    };
    Ok(model)
}

pub fn ae_encode(model: &AutoencoderModel, x: &[f64]) -> Result<LatentVector> {
    model.encode(x)
}
