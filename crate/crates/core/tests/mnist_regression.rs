//! Regression checks against the MNIST files under `data/mnist` (or
//! `$QELM_DATA_DIR/mnist`). Each test prints a notice and returns early when
//! the files are absent.

mod common;

use std::path::PathBuf;

use nalgebra::DMatrix;
use qelm::data::{IdxLayout, LabeledDataset, Split};
use qelm::experiment::{run_raw_baseline, ExperimentConfig};
use qelm::reduction::{fit_autoencoder_matrix, fit_pca_matrix, image_matrix, AutoencoderConfig, AutoencoderModel};

fn data_root() -> PathBuf {
    std::env::var_os("QELM_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn load(split: Split) -> Option<LabeledDataset> {
    let dir = data_root().join("mnist");
    match IdxLayout::new(&dir).load(split) {
        Ok(ds) => Some(ds),
        Err(e) => {
            eprintln!("skipping: MNIST not available at {} ({e})", dir.display());
            None
        }
    }
}

fn subset(split: Split, n: usize) -> Option<DMatrix<f64>> {
    let ds = load(split)?.subsample(n, 3);
    Some(image_matrix(&ds).unwrap())
}

fn mean_bce(x: &DMatrix<f64>, recon: &DMatrix<f64>) -> f64 {
    let eps = 1e-7;
    let total: f64 = x
        .iter()
        .zip(recon.iter())
        .map(|(&y, &p)| {
            let p = p.clamp(eps, 1.0 - eps);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    total / x.len() as f64
}

#[test]
fn pixel_range_and_split_sizes() {
    let (Some(train), Some(test)) = (load(Split::Train), load(Split::Test)) else {
        return;
    };
    for ds in [&train, &test] {
        let (lo, hi) = ds.images().iter().flat_map(|v| v.as_slice().iter()).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), &p| (lo.min(p), hi.max(p)),
        );
        assert_eq!((lo, hi), (0.0, 1.0));
        assert!(ds.images().iter().all(|v| v.len() == 784));
        let mut seen = [false; 10];
        ds.labels().iter().for_each(|&l| seen[l as usize] = true);
        assert!(seen.iter().all(|&s| s));
    }
    println!("train {} / test {}", train.len(), test.len());
}

#[test]
fn pca_variances_match_dense_eigensolver() {
    let Some(x) = subset(Split::Train, 1500) else {
        return;
    };
    let model = fit_pca_matrix(&x, 20).unwrap();
    let ev = &model.explained_variance;
    assert!(ev.windows(2).all(|w| w[1] <= w[0]));

    // covariance eigenvalues by cyclic Jacobi, independent of nalgebra's solver
    let mean = x.column_mean();
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        col -= &mean;
    }
    let cov = (&c * c.transpose()) / (x.ncols() as f64 - 1.0);
    let total: f64 = cov.trace();
    let oracle: Vec<f64> = common::jacobi_eigenvalues(cov).into_iter().rev().take(20).collect();
    for (a, b) in ev.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9 * total, "{a} vs {b}");
    }
    let frac: f64 = ev.iter().sum::<f64>() / total;
    println!("PCA(20) explains {:.4} of the variance", frac);
    assert!(frac > 0.5 && frac < 0.8);
}

fn small_ae(x: &DMatrix<f64>) -> AutoencoderModel {
    let mut cfg = AutoencoderConfig::new(16, 50, 7);
    cfg.adam.learning_rate = 1e-3;
    fit_autoencoder_matrix(x, &cfg).unwrap()
}

// Recorded from the reference run of `small_ae` on the 2000-image subset.
const AE16_FINAL_BCE: f64 = 0.129_054_796_116_456_5;
const PCA16_BCE: f64 = 0.146_755_445_112_622_28;

#[test]
fn autoencoder_beats_pca_reconstruction_and_replays() {
    let Some(x) = subset(Split::Train, 2000) else {
        return;
    };
    let ae = small_ae(&x);
    let pca = fit_pca_matrix(&x, 16).unwrap();
    let recon = DMatrix::from_columns(
        &x.column_iter()
            .map(|c| pca.reconstruct(&pca.project(c.as_slice()).unwrap()))
            .collect::<Vec<_>>(),
    );
    let pca_bce = mean_bce(&x, &recon);
    println!("AE(16) BCE {:?}  PCA(16) BCE {:?}", ae.metadata.final_loss, pca_bce);
    assert!((ae.metadata.final_loss - AE16_FINAL_BCE).abs() < 1e-7);
    assert!((pca_bce - PCA16_BCE).abs() < 1e-9);
    assert!(ae.metadata.final_loss < pca_bce);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ae.json");
    ae.save_json(&path).unwrap();
    let back = AutoencoderModel::load_json(&path).unwrap();
    let replay = back.reconstruction_loss(&x).unwrap();
    assert!((replay - ae.metadata.final_loss).abs() < 1e-6);
    assert_eq!(back.encode_batch(&x).unwrap(), ae.encode_batch(&x).unwrap());
}

#[test]
fn raw_pixel_softmax_lands_in_expected_band() {
    if load(Split::Train).is_none() {
        return;
    }
    let cfg = ExperimentConfig {
        data_dir: Some(data_root()),
        cache: false,
        ..ExperimentConfig::default()
    };
    let row = run_raw_baseline(&cfg).unwrap();
    println!("raw-pixel softmax: train {} test {}", row.train_acc, row.test_acc);
    assert!((0.90..=0.93).contains(&row.test_acc), "{}", row.test_acc);
}
