//! Experiment configuration.
//!
//! Configs are flat TOML key-value files; every key is optional and falls
//! back to the desk-scale default. `key=value` overrides are applied on top
//! and values are parsed as TOML literals, so `n_qubits=9` is an integer and
//! `hamiltonian=h1` a bare string.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::TrainConfig;
use crate::encoding::{EncodingKind, PhaseRange};
use crate::optim::AdamConfig;
use crate::reduction::ReductionKind;
use crate::reservoir::{Boundary, HamiltonianKind, ReservoirSpec};
use crate::{QelmError, Result, NUM_CLASSES};

/// Environment variable naming the data root directory.
pub const DATA_DIR_ENV: &str = "QELM_DATA_DIR";

/// Data root used when neither the config nor the environment names one.
pub const DEFAULT_DATA_ROOT: &str = "data";

/// Keys that locate files rather than describe the experiment; excluded from
/// the fingerprint.
const LOCATION_KEYS: [&str; 3] = ["output_dir", "data_dir", "cache_dir"];

mod as_str {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `mnist`, `fashion-mnist`, or a directory holding IDX files.
    pub dataset: String,
    pub data_dir: Option<PathBuf>,
    /// Training images kept after subsampling; 0 keeps all.
    pub train_size: usize,
    pub test_size: usize,
    pub subsample_seed: u64,

    #[serde(with = "as_str")]
    pub reduction: ReductionKind,
    /// 0 derives the dimension from the encoding and qubit count.
    pub latent_dim: usize,
    pub ae_epochs: usize,
    pub ae_width: f64,
    pub latent_train: Option<PathBuf>,
    pub latent_test: Option<PathBuf>,

    #[serde(with = "as_str")]
    pub encoding: EncodingKind,
    pub phase_range: PhaseRange,
    pub n_qubits: usize,

    #[serde(with = "as_str")]
    pub hamiltonian: HamiltonianKind,
    pub boundary: Boundary,
    pub evolution_time: f64,
    pub floquet_periods: u32,

    /// 0 means exact probabilities.
    pub shots: u64,

    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// 0 disables early stopping.
    pub patience: usize,
    pub validation_fraction: f64,
    pub standardize: bool,

    pub seed: u64,
    pub output_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub cache: bool,
    pub save_model: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            dataset: "mnist".into(),
            data_dir: None,
            train_size: 8000,
            test_size: 2000,
            subsample_seed: 0,
            reduction: ReductionKind::Pca,
            latent_dim: 0,
            ae_epochs: 50,
            ae_width: 1.0,
            latent_train: None,
            latent_test: None,
            encoding: EncodingKind::DenseAngle,
            phase_range: PhaseRange::Pi,
            n_qubits: 8,
            hamiltonian: HamiltonianKind::H2,
            boundary: Boundary::Open,
            evolution_time: crate::reservoir::STATIC_EVOLUTION_TIME,
            floquet_periods: crate::reservoir::H1_PERIODS,
            shots: 0,
            learning_rate: train.adam.learning_rate,
            batch_size: train.batch_size,
            epochs: train.epochs,
            patience: train.patience.unwrap_or(0),
            validation_fraction: train.validation_fraction,
            standardize: train.standardize,
            seed: 0,
            output_dir: PathBuf::from("results"),
            cache_dir: None,
            cache: true,
            save_model: false,
        }
    }
}

/// Stage-specific seed: the first eight bytes (little-endian) of
/// `SHA-256(seed as u64 LE ‖ stage)`.
pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Split `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| QelmError::Config(format!("override `{s}` is not key=value")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(QelmError::Config(format!("override `{s}` has an empty key")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

pub(crate) fn apply_overrides(table: &mut toml::Table, overrides: &[(String, String)]) {
    for (k, v) in overrides {
        table.insert(k.clone(), parse_override_value(v));
    }
}

pub(crate) fn read_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| QelmError::io(path, e))?;
    text.parse::<toml::Table>()
        .map_err(|e| QelmError::Config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| QelmError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| QelmError::Config(e.to_string()))?;
        Self::from_table(table)
    }

    /// Load an optional config file, then apply overrides.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = match path {
            Some(p) => read_table(p)?,
            None => toml::Table::new(),
        };
        apply_overrides(&mut table, overrides);
        Self::from_table(table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(QelmError::Config(m));
        if self.n_qubits == 0 {
            return fail("n_qubits must be at least 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            return fail("learning_rate must be positive".into());
        }
        if self.evolution_time < 0.0 || !self.evolution_time.is_finite() {
            return fail("evolution_time must be finite and non-negative".into());
        }
        let d = self.latent_dim();
        match self.encoding {
            EncodingKind::Amplitude => {
                if d == 0 || d > 1 << self.n_qubits {
                    return fail(format!(
                        "amplitude encoding on {} qubits needs 1..={} features, got {d}",
                        self.n_qubits,
                        1usize << self.n_qubits
                    ));
                }
            }
            kind => {
                if d != kind.latent_dim(self.n_qubits) {
                    return fail(format!(
                        "{kind} encoding on {} qubits needs latent dimension {}, got {d}",
                        self.n_qubits,
                        kind.latent_dim(self.n_qubits)
                    ));
                }
            }
        }
        if self.reduction == ReductionKind::None && d != crate::IMAGE_PIXELS {
            return fail(format!(
                "reduction `none` passes {} pixels, latent_dim is {d}",
                crate::IMAGE_PIXELS
            ));
        }
        if self.reduction == ReductionKind::Imported
            && (self.latent_train.is_none() || self.latent_test.is_none())
        {
            return fail("imported reduction needs latent_train and latent_test".into());
        }
        Ok(())
    }

    /// Latent dimension: explicit, or 784 for raw pixels, or the encoding's
    /// natural size.
    pub fn latent_dim(&self) -> usize {
        if self.latent_dim > 0 {
            self.latent_dim
        } else if self.reduction == ReductionKind::None {
            crate::IMAGE_PIXELS
        } else {
            match self.encoding {
                EncodingKind::Amplitude => 2 * self.n_qubits,
                kind => kind.latent_dim(self.n_qubits),
            }
        }
    }

    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_seed(self.seed, stage)
    }

    /// Canonical JSON of the fields that define the experiment.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            for k in LOCATION_KEYS {
                map.remove(k);
            }
            map.remove("cache");
            map.remove("save_model");
        }
        serde_json::to_string(&v).expect("json value serializes")
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON.
    pub fn fingerprint(&self) -> String {
        hex_digest(self.canonical_json().as_bytes())[..16].to_string()
    }

    /// Directory containing the IDX files.
    pub fn data_path(&self) -> PathBuf {
        let root = self
            .data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_ROOT));
        match self.dataset.as_str() {
            "mnist" | "fashion-mnist" => root.join(&self.dataset),
            other => PathBuf::from(other),
        }
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .unwrap_or_else(|| self.output_dir.join("cache"))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                ..AdamConfig::default()
            },
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed: self.stage_seed("classifier"),
            patience: (self.patience > 0).then_some(self.patience),
            validation_fraction: self.validation_fraction,
            standardize: self.standardize,
            classes: Some(NUM_CLASSES),
        }
    }

    pub fn reservoir_spec(&self) -> ReservoirSpec {
        ReservoirSpec {
            kind: self.hamiltonian,
            n_qubits: self.n_qubits,
            seed: self.stage_seed("hamiltonian"),
            boundary: self.boundary,
            evolution_time: self.evolution_time,
            floquet_periods: self.floquet_periods,
        }
    }

    /// Settings for the full-scale profile: all images, no subsampling.
    pub fn full_profile(mut self) -> Self {
        self.train_size = 0;
        self.test_size = 0;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_are_typed() {
        let o = [
            parse_override("n_qubits=5").unwrap(),
            parse_override("hamiltonian=h6-mbl").unwrap(),
            parse_override("reduction = ae").unwrap(),
        ];
        let cfg = ExperimentConfig::load(None, &o).unwrap();
        assert_eq!(cfg.n_qubits, 5);
        assert_eq!(cfg.latent_dim(), 10);
        assert_eq!(cfg.hamiltonian.name(), "h6-mbl");
        assert_eq!(cfg.reduction, ReductionKind::Ae);
    }

    #[test]
    fn rejects_inconsistent_latent_dim_and_unknown_keys() {
        assert!(ExperimentConfig::from_toml_str("latent_dim = 7").is_err());
        assert!(ExperimentConfig::from_toml_str("qubits = 7").is_err());
        assert!(ExperimentConfig::from_toml_str("encoding = \"angle\"\nlatent_dim = 8").is_ok());
    }

    #[test]
    fn fingerprint_ignores_locations_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        b.data_dir = Some("/tmp".into());
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.seed = 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn stage_seeds_differ() {
        assert_ne!(derive_seed(0, "hamiltonian"), derive_seed(0, "classifier"));
        assert_eq!(derive_seed(3, "x"), derive_seed(3, "x"));
    }
}
