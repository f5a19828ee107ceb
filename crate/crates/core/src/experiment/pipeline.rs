//! The single-cell pipeline: ingest, reduce, encode, evolve, measure, train,
//! evaluate.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;

use super::config::{hex_digest, ExperimentConfig};
use super::results::ResultRow;
use crate::classifier::{evaluate, train, SoftmaxModel, TrainTrace};
use crate::data::{IdxLayout, LabeledDataset, Split};
use crate::encoding::{degenerate_pair_count, EncodingKind, EncodingSpec};
use crate::error::StageExt;
use crate::measurement::{read_feature_block, resample_columns, write_feature_block};
use crate::reduction::autoencoder::{fit_autoencoder_matrix, AutoencoderConfig};
use crate::reduction::pca::{fit_pca_matrix, image_matrix};
use crate::reduction::{import_latents, ReductionKind};
use crate::reservoir::UnitaryPropagator;
use crate::{QelmError, Result};

/// States encoded and evolved per block.
const EVOLVE_BLOCK: usize = 1024;

/// Feature matrices (one sample per column) with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub train: DMatrix<f64>,
    pub train_labels: Vec<u8>,
    pub test: DMatrix<f64>,
    pub test_labels: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: ResultRow,
    pub model: SoftmaxModel,
    pub trace: TrainTrace,
}

pub fn load_splits(cfg: &ExperimentConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    let layout = IdxLayout::new(cfg.data_path());
    let pick = |split: Split, size: usize, salt: u64| -> Result<LabeledDataset> {
        let ds = layout.load(split)?;
        Ok(if size > 0 && size < ds.len() {
            ds.subsample(size, cfg.subsample_seed.wrapping_add(salt))
        } else {
            ds
        })
    };
    Ok((pick(Split::Train, cfg.train_size, 0)?, pick(Split::Test, cfg.test_size, 1)?))
}

fn cache_file(cfg: &ExperimentConfig, kind: &str, key: &str, part: &str) -> PathBuf {
    cfg.cache_path()
        .join(format!("{kind}-{}-{part}.bin", &hex_digest(key.as_bytes())[..16]))
}

fn cached_pair<F>(cfg: &ExperimentConfig, kind: &str, key: &str, compute: F) -> Result<(DMatrix<f64>, DMatrix<f64>)>
where
    F: FnOnce() -> Result<(DMatrix<f64>, DMatrix<f64>)>,
{
    if !cfg.cache {
        return compute();
    }
    let (a, b) = (cache_file(cfg, kind, key, "train"), cache_file(cfg, kind, key, "test"));
    if a.exists() && b.exists() {
        if let (Ok(x), Ok(y)) = (read_feature_block(&a), read_feature_block(&b)) {
            log::info!("{kind} cache hit {}", a.display());
            return Ok((x, y));
        }
        log::warn!("ignoring unreadable {kind} cache {}", a.display());
    }
    let (x, y) = compute()?;
    let dir = cfg.cache_path();
    std::fs::create_dir_all(&dir).map_err(|e| QelmError::io(&dir, e))?;
    write_feature_block(&a, &x)?;
    write_feature_block(&b, &y)?;
    Ok((x, y))
}

fn latent_key(cfg: &ExperimentConfig) -> String {
    let mut key = serde_json::json!({
        "dataset": cfg.dataset,
        "train_size": cfg.train_size,
        "test_size": cfg.test_size,
        "subsample_seed": cfg.subsample_seed,
        "reduction": cfg.reduction.name(),
        "d": cfg.latent_dim(),
    });
    match cfg.reduction {
        ReductionKind::Ae => {
            key["ae_epochs"] = cfg.ae_epochs.into();
            key["ae_width"] = cfg.ae_width.into();
            key["ae_seed"] = cfg.stage_seed("autoencoder").into();
        }
        ReductionKind::Imported => {
            key["latent_train"] = serde_json::json!(cfg.latent_train);
            key["latent_test"] = serde_json::json!(cfg.latent_test);
        }
        _ => {}
    }
    key.to_string()
}

fn feature_key(cfg: &ExperimentConfig) -> String {
    let mut spec = cfg.reservoir_spec();
    if !spec.kind.is_seeded() {
        spec.seed = 0;
    }
    serde_json::json!({
        "latents": latent_key(cfg),
        "encoding": cfg.encoding.name(),
        "phase_range": cfg.phase_range,
        "reservoir": spec,
        "shots": cfg.shots,
        "shot_seed": if cfg.shots > 0 { cfg.stage_seed("shots") } else { 0 },
    })
    .to_string()
}

fn matrix_from_columns(rows: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r])
}

fn reduce(
    cfg: &ExperimentConfig,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = cfg.latent_dim();
    let xtr = image_matrix(train)?;
    let xte = image_matrix(test)?;
    match cfg.reduction {
        ReductionKind::None => Ok((xtr, xte)),
        ReductionKind::Pca => {
            let model = fit_pca_matrix(&xtr, d)?;
            let apply = |x: &DMatrix<f64>| -> Result<DMatrix<f64>> {
                let cols = x
                    .column_iter()
                    .map(|c| Ok(model.transform(c.as_slice())?.into_values()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(matrix_from_columns(d, &cols))
            };
            Ok((apply(&xtr)?, apply(&xte)?))
        }
        ReductionKind::Ae => {
            let ae_cfg = AutoencoderConfig {
                width: cfg.ae_width,
                ..AutoencoderConfig::new(d, cfg.ae_epochs, cfg.stage_seed("autoencoder"))
            };
            let model = fit_autoencoder_matrix(&xtr, &ae_cfg)?;
            log::info!("autoencoder final reconstruction BCE {:.5}", model.metadata.final_loss);
            Ok((model.encode_batch(&xtr)?, model.encode_batch(&xte)?))
        }
        ReductionKind::Imported => unreachable!("imported latents bypass the reducer"),
    }
}

fn imported(path: &Path, d: usize) -> Result<(DMatrix<f64>, Vec<u8>)> {
    let t = import_latents(path, d)?;
    let cols: Vec<Vec<f64>> = t.latents.into_iter().map(|z| z.into_values()).collect();
    Ok((matrix_from_columns(d, &cols), t.labels))
}

/// Latent matrices (`d × n`) and labels for both splits.
pub fn compute_latents(cfg: &ExperimentConfig) -> Result<FeatureSet> {
    cfg.validate()?;
    if cfg.reduction == ReductionKind::Imported {
        let d = cfg.latent_dim();
        let (train, train_labels) =
            imported(cfg.latent_train.as_deref().expect("validated"), d).stage("ingest")?;
        let (test, test_labels) =
            imported(cfg.latent_test.as_deref().expect("validated"), d).stage("ingest")?;
        return Ok(FeatureSet {
            train,
            train_labels,
            test,
            test_labels,
        });
    }
    let (train_ds, test_ds) = load_splits(cfg).stage("ingest")?;
    let (train, test) =
        cached_pair(cfg, "latents", &latent_key(cfg), || reduce(cfg, &train_ds, &test_ds)).stage("reduce")?;
    Ok(FeatureSet {
        train,
        train_labels: train_ds.labels().to_vec(),
        test,
        test_labels: test_ds.labels().to_vec(),
    })
}

/// Encode every column of `latents` and return `|⟨k|Uψ⟩|²` (`2^N × n`).
pub fn readout_features(
    spec: &EncodingSpec,
    propagator: &UnitaryPropagator,
    latents: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(1 << spec.n_qubits, latents.ncols());
    let mut start = 0;
    while start < latents.ncols() {
        let len = EVOLVE_BLOCK.min(latents.ncols() - start);
        let states = (start..start + len)
            .map(|j| spec.encode(latents.column(j).as_slice()))
            .collect::<Result<Vec<_>>>()
            .stage("encode")?;
        let probs = propagator.evolve_probabilities(&states).stage("evolve")?;
        out.columns_mut(start, len).copy_from(&probs);
        start += len;
    }
    Ok(out)
}

fn quantum_features(cfg: &ExperimentConfig, latents: &FeatureSet) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let enc = EncodingSpec::fit(
        cfg.encoding,
        cfg.n_qubits,
        cfg.phase_range,
        latents.train.as_slice().chunks(latents.train.nrows().max(1)),
    )
    .stage("encode")?;
    let propagator = cfg.reservoir_spec().propagator().stage("evolve")?;
    let degenerate_before = degenerate_pair_count();
    let mut train = readout_features(&enc, &propagator, &latents.train)?;
    let mut test = readout_features(&enc, &propagator, &latents.test)?;
    if cfg.encoding == EncodingKind::General {
        let n = degenerate_pair_count() - degenerate_before;
        if n > 0 {
            log::warn!("{n} general-encoding pairs were (0,0) and mapped to |0>");
        }
    }
    if cfg.shots > 0 {
        let seed = cfg.stage_seed("shots");
        resample_columns(&mut train, cfg.shots, seed).stage("measure")?;
        resample_columns(&mut test, cfg.shots, seed ^ 0x7e57).stage("measure")?;
    }
    Ok((train, test))
}

/// Readout feature matrices (`2^N × n`) for both splits.
pub fn compute_features(cfg: &ExperimentConfig) -> Result<FeatureSet> {
    let latents = compute_latents(cfg)?;
    let (train, test) = cached_pair(cfg, "features", &feature_key(cfg), || quantum_features(cfg, &latents))?;
    Ok(FeatureSet {
        train,
        test,
        ..latents
    })
}

fn fit_and_score(cfg: &ExperimentConfig, fs: &FeatureSet) -> Result<(SoftmaxModel, TrainTrace, f64, f64)> {
    let (model, trace) = train(&fs.train, &fs.train_labels, &cfg.train_config()).stage("train")?;
    let train_acc = evaluate(&model, &fs.train, &fs.train_labels).stage("evaluate")?;
    let test_acc = evaluate(&model, &fs.test, &fs.test_labels).stage("evaluate")?;
    Ok((model, trace, train_acc, test_acc))
}

fn save_artifacts(cfg: &ExperimentConfig, fp: &str, model: &SoftmaxModel, trace: &TrainTrace) -> Result<()> {
    if !cfg.save_model {
        return Ok(());
    }
    let dir = cfg.output_dir.join("models");
    std::fs::create_dir_all(&dir).map_err(|e| QelmError::io(&dir, e))?;
    model.save_json(dir.join(format!("{fp}.json")))?;
    trace.write_csv(dir.join(format!("{fp}-trace.csv")))
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    cfg: &ExperimentConfig,
    fingerprint: String,
    reduction: &str,
    encoding: &str,
    hamiltonian: &str,
    n_qubits: usize,
    accs: (f64, f64),
    started: Instant,
) -> ResultRow {
    ResultRow {
        fingerprint,
        dataset: cfg.dataset.clone(),
        reduction: reduction.into(),
        encoding: encoding.into(),
        hamiltonian: hamiltonian.into(),
        n_qubits,
        seed: cfg.seed,
        train_acc: accs.0,
        test_acc: accs.1,
        wall_s: started.elapsed().as_secs_f64(),
    }
}

/// Run one configuration end to end.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let started = Instant::now();
    let fp = cfg.fingerprint();
    let fs = compute_features(cfg)?;
    let (model, trace, train_acc, test_acc) = fit_and_score(cfg, &fs)?;
    save_artifacts(cfg, &fp, &model, &trace)?;
    let row = make_row(
        cfg,
        fp,
        cfg.reduction.name(),
        cfg.encoding.name(),
        cfg.hamiltonian.name(),
        cfg.n_qubits,
        (train_acc, test_acc),
        started,
    );
    log::info!("{} test_acc={} ({:.1}s)", row.fingerprint, row.test_acc, row.wall_s);
    Ok(RunOutcome { row, model, trace })
}

/// Softmax on the raw 784 pixels.
pub fn run_raw_baseline(cfg: &ExperimentConfig) -> Result<ResultRow> {
    let started = Instant::now();
    let (train_ds, test_ds) = load_splits(cfg).stage("ingest")?;
    let fs = FeatureSet {
        train: image_matrix(&train_ds).stage("ingest")?,
        train_labels: train_ds.labels().to_vec(),
        test: image_matrix(&test_ds).stage("ingest")?,
        test_labels: test_ds.labels().to_vec(),
    };
    let (_, _, tr, te) = fit_and_score(cfg, &fs)?;
    Ok(make_row(
        cfg,
        format!("classical-raw-{}", cfg.fingerprint()),
        "none",
        "none",
        "none",
        0,
        (tr, te),
        started,
    ))
}

/// Softmax directly on the latents the quantum pipeline would encode.
pub fn run_latent_baseline(cfg: &ExperimentConfig) -> Result<ResultRow> {
    let started = Instant::now();
    let fs = compute_latents(cfg)?;
    let (_, _, tr, te) = fit_and_score(cfg, &fs)?;
    Ok(make_row(
        cfg,
        format!("classical-latent-{}", cfg.fingerprint()),
        cfg.reduction.name(),
        "none",
        "none",
        cfg.n_qubits,
        (tr, te),
        started,
    ))
}

/// Raw-pixel and latent softmax baselines sharing `cfg`'s training settings.
pub fn run_classical_baselines(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(vec![run_raw_baseline(cfg)?, run_latent_baseline(cfg)?])
}
