//! Single-layer softmax readout trained with categorical cross-entropy and
//! Adam. Used both on reservoir probabilities and as the classical baseline.
//!
//! Feature matrices hold one sample per column (`F × n`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::optim::{AdamConfig, AdamState};
use crate::{QelmError, Result};

/// Per-feature affine standardization `(x - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.ncols().max(1) as f64;
        let mean: Vec<f64> = x.row_iter().map(|r| r.sum() / n).collect();
        let scale = x
            .row_iter()
            .zip(&mean)
            .map(|(r, &m)| {
                let var = r.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for (r, mut row) in out.row_iter_mut().enumerate() {
            let (m, s) = (self.mean[r], self.scale[r]);
            row.apply(|v| *v = (*v - m) / s);
        }
        out
    }
}

/// `softmax(W x + b)` with `W: C × F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
    #[serde(default)]
    pub standardizer: Option<Standardizer>,
}

impl SoftmaxModel {
    pub fn zeros(classes: usize, features: usize) -> Result<Self> {
        if classes < 2 {
            return Err(QelmError::InvalidArgument(format!(
                "softmax needs at least 2 classes, got {classes}"
            )));
        }
        Ok(Self {
            weights: DMatrix::zeros(classes, features),
            biases: DVector::zeros(classes),
            standardizer: None,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(classes: usize, features: usize, seed: u64) -> Result<Self> {
        let mut m = Self::zeros(classes, features)?;
        let limit = (6.0 / (classes + features) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("valid range");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        m.weights.iter_mut().for_each(|w| *w = dist.sample(&mut rng));
        Ok(m)
    }

    pub fn classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn features(&self) -> usize {
        self.weights.ncols()
    }

    fn prepare(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.features() {
            return Err(QelmError::DimensionMismatch {
                expected: self.features(),
                got: x.nrows(),
            });
        }
        Ok(match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.clone(),
        })
    }

    /// `W X + b` for a batch.
    pub fn logits(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let x = self.prepare(x)?;
        let mut z = &self.weights * x;
        for mut col in z.column_iter_mut() {
            col += &self.biases;
        }
        Ok(z)
    }

    /// Class probabilities for one sample.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        let x = DMatrix::from_column_slice(features.len(), 1, features);
        let z = self.logits(&x)?;
        Ok(softmax(z.column(0).as_slice()))
    }

    /// Probability matrix (`C × n`) for a batch.
    pub fn predict_proba(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut z = self.logits(x)?;
        for mut col in z.column_iter_mut() {
            let p = softmax(col.as_slice());
            col.copy_from_slice(&p);
        }
        Ok(z)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let doc = serde_json::json!({
            "format": "qelm-softmax",
            "version": 1,
            "classes": self.classes(),
            "features": self.features(),
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
        if doc["format"] != "qelm-softmax" || doc["version"] != 1 {
            return Err(QelmError::Format("not a qelm-softmax v1 document".into()));
        }
        let model: SoftmaxModel = serde_json::from_value(doc["model"].clone())
            .map_err(|e| QelmError::Format(e.to_string()))?;
        if model.classes() != doc["classes"].as_u64().unwrap_or(0) as usize
            || model.features() != doc["features"].as_u64().unwrap_or(0) as usize
        {
            return Err(QelmError::Format("shape header does not match weights".into()));
        }
        Ok(model)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-log softmax(z)_y` via log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
}

fn check_labels(labels: &[u8], classes: usize, n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(QelmError::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
        return Err(QelmError::InvalidArgument(format!(
            "label {bad} out of range for {classes} classes"
        )));
    }
    Ok(())
}

/// Mean cross-entropy over the batch and its gradient. The logit gradient is
/// `(p - onehot(y)) / B`, back-propagated to `W` and `b`.
pub fn loss_and_grad(
    model: &SoftmaxModel,
    x: &DMatrix<f64>,
    labels: &[u8],
) -> Result<(f64, Gradients)> {
    check_labels(labels, model.classes(), x.ncols())?;
    let xs = model.prepare(x)?;
    let mut z = &model.weights * &xs;
    for mut col in z.column_iter_mut() {
        col += &model.biases;
    }
    let b = x.ncols().max(1) as f64;
    let mut loss = 0.0;
    for (j, &y) in labels.iter().enumerate() {
        let col = z.column(j).iter().copied().collect::<Vec<_>>();
        loss += cross_entropy(&col, y as usize);
        let mut p = softmax(&col);
        p[y as usize] -= 1.0;
        for (k, pk) in p.into_iter().enumerate() {
            z[(k, j)] = pk / b;
        }
    }
    let dz = z;
    let weights = &dz * xs.transpose();
    let biases = dz.column_sum();
    Ok((loss / b, Gradients { weights, biases }))
}

/// Fraction of argmax-correct predictions; ties go to the lowest class index.
pub fn evaluate(model: &SoftmaxModel, x: &DMatrix<f64>, labels: &[u8]) -> Result<f64> {
    check_labels(labels, model.classes(), x.ncols())?;
    if labels.is_empty() {
        return Ok(0.0);
    }
    let z = model.logits(x)?;
    let correct = z
        .column_iter()
        .zip(labels)
        .filter(|(col, &y)| argmax(col.as_slice()) == y as usize)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Index of the first maximal entry.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Stop after this many epochs without held-out loss improvement and
    /// restore the best weights. `None` disables early stopping.
    pub patience: Option<usize>,
    /// Fraction of the training samples held out for early stopping.
    pub validation_fraction: f64,
    /// Standardize inputs with train statistics before the linear layer.
    pub standardize: bool,
    /// Defaults to `max(label) + 1` (at least 2).
    pub classes: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size: 128,
            epochs: 30,
            seed: 0,
            patience: Some(5),
            validation_fraction: 0.1,
            standardize: false,
            classes: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.adam.learning_rate.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(QelmError::InvalidArgument("learning rate must be > 0".into()));
        }
        if self.epochs < 1 {
            return Err(QelmError::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(QelmError::InvalidArgument("batch size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(QelmError::InvalidArgument(
                "validation fraction must be in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainTrace {
    /// `epoch,loss,train_acc,val_acc`; missing validation values are empty.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = BufWriter::new(File::create(path).map_err(|e| QelmError::io(path, e))?);
        let mut body = || -> std::io::Result<()> {
            writeln!(w, "epoch,loss,train_acc,val_acc")?;
            for r in &self.epochs {
                let val = r.val_acc.map(|v| v.to_string()).unwrap_or_default();
                writeln!(w, "{},{},{},{}", r.epoch, r.loss, r.train_acc, val)?;
            }
            w.flush()
        };
        body().map_err(|e| QelmError::io(path, e))
    }
}

fn mean_loss(model: &SoftmaxModel, x: &DMatrix<f64>, labels: &[u8]) -> Result<(f64, f64)> {
    if labels.is_empty() {
        return Ok((0.0, 0.0));
    }
    let z = model.logits(x)?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (col, &y) in z.column_iter().zip(labels) {
        loss += cross_entropy(col.as_slice(), y as usize);
        if argmax(col.as_slice()) == y as usize {
            correct += 1;
        }
    }
    let n = labels.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Train a softmax layer on `x` (`F × n`). Deterministic for a fixed seed and
/// data order.
pub fn train(x: &DMatrix<f64>, labels: &[u8], cfg: &TrainConfig) -> Result<(SoftmaxModel, TrainTrace)> {
    cfg.validate()?;
    if x.ncols() != labels.len() {
        return Err(QelmError::DimensionMismatch {
            expected: x.ncols(),
            got: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(QelmError::InvalidArgument("cannot train on zero samples".into()));
    }
    let classes = cfg
        .classes
        .unwrap_or_else(|| (*labels.iter().max().expect("non-empty") as usize + 1).max(2));
    check_labels(labels, classes, x.ncols())?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let early_stop = cfg.patience.is_some() && cfg.validation_fraction > 0.0;
    let n_val = if early_stop {
        ((labels.len() as f64) * cfg.validation_fraction).round() as usize
    } else {
        0
    };
    if n_val > 0 {
        order.shuffle(&mut rng);
    }
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();
    if n_val > 0 {
        // keep the train portion in original order so only the held-out
        // choice depends on the RNG at this point
        train_idx.sort_unstable();
    }
    let x_train = x.select_columns(train_idx.iter());
    let y_train: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
    let x_val = x.select_columns(val_idx.iter());
    let y_val: Vec<u8> = val_idx.iter().map(|&i| labels[i]).collect();

    let mut model = SoftmaxModel::glorot(classes, x.nrows(), rng.random())?;
    if cfg.standardize {
        model.standardizer = Some(Standardizer::fit(&x_train));
    }
    let mut w_state = AdamState::new(model.weights.len());
    let mut b_state = AdamState::new(model.biases.len());
    let mut step = 0u64;
    let mut trace = TrainTrace::default();
    let mut best: Option<(f64, SoftmaxModel, usize)> = None;
    let mut since_best = 0usize;
    let mut perm: Vec<usize> = (0..y_train.len()).collect();

    for epoch in 1..=cfg.epochs {
        perm.shuffle(&mut rng);
        for batch in perm.chunks(cfg.batch_size) {
            let xb = x_train.select_columns(batch.iter());
            let yb: Vec<u8> = batch.iter().map(|&i| y_train[i]).collect();
            let (loss, g) = loss_and_grad(&model, &xb, &yb)?;
            if !loss.is_finite() {
                return Err(QelmError::Divergence(format!(
                    "non-finite batch loss at epoch {epoch}"
                )));
            }
            step += 1;
            w_state.update(&cfg.adam, step, model.weights.as_mut_slice(), g.weights.as_slice());
            b_state.update(&cfg.adam, step, model.biases.as_mut_slice(), g.biases.as_slice());
        }
        let (loss, train_acc) = mean_loss(&model, &x_train, &y_train)?;
        if !loss.is_finite() {
            return Err(QelmError::Divergence(format!("non-finite loss at epoch {epoch}")));
        }
        let (val_loss, val_acc) = if n_val > 0 {
            let (l, a) = mean_loss(&model, &x_val, &y_val)?;
            (Some(l), Some(a))
        } else {
            (None, None)
        };
        trace.epochs.push(EpochRecord {
            epoch,
            loss,
            train_acc,
            val_loss,
            val_acc,
        });
        if let (Some(vl), Some(patience)) = (val_loss, cfg.patience) {
            if best.as_ref().map_or(true, |(b, _, _)| vl < *b) {
                best = Some((vl, model.clone(), epoch));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    trace.stopped_early = true;
                    break;
                }
            }
        }
    }
    trace.best_epoch = trace.epochs.len();
    if let Some((_, m, e)) = best {
        model = m;
        trace.best_epoch = e;
    }
    Ok((model, trace))
}
