//! IDX (MNIST / Fashion-MNIST) ingest.
//!
//! Layout, all integers big-endian u32:
//! images: `0x00000803, count, rows, cols` then `count*rows*cols` bytes;
//! labels: `0x00000801, count` then `count` bytes.
//! Gzip-compressed files (`.gz`, detected by magic bytes) are read transparently.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{QelmError, Result, IMAGE_PIXELS, NUM_CLASSES};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_SIDE: usize = 28;

/// Real-valued sample before reduction. Entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(QelmError::Data(format!("non-finite feature at index {i}")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Images with their class labels. `images.len() == labels.len()`, pixels in
/// `[0, 1]`, labels in `0..10`.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    images: Vec<FeatureVector>,
    labels: Vec<u8>,
    split: Split,
}

impl LabeledDataset {
    pub fn new(images: Vec<FeatureVector>, labels: Vec<u8>, split: Split) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(QelmError::Length(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        for (i, img) in images.iter().enumerate() {
            if img.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(QelmError::Data(format!("image {i} has a pixel outside [0,1]")));
            }
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(QelmError::Data(format!("label {bad} out of range")));
        }
        Ok(Self {
            images,
            labels,
            split,
        })
    }

    pub fn images(&self) -> &[FeatureVector] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.images.first().map(FeatureVector::len)
    }

    /// Deterministic subset of `k` samples (without replacement). The
    /// relative order of the chosen samples is preserved. `k >= len` returns
    /// a full copy.
    pub fn subsample(&self, k: usize, seed: u64) -> LabeledDataset {
        if k >= self.len() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, self.len(), k).into_vec();
        picked.sort_unstable();
        LabeledDataset {
            images: picked.iter().map(|&i| self.images[i].clone()).collect(),
            labels: picked.iter().map(|&i| self.labels[i]).collect(),
            split: self.split,
        }
    }
}

/// Pair images with labels after checking the lengths agree.
pub fn assemble_dataset(
    images: Vec<FeatureVector>,
    labels: Vec<u8>,
    split: Split,
) -> Result<LabeledDataset> {
    LabeledDataset::new(images, labels, split)
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| QelmError::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| QelmError::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| QelmError::Length("truncated IDX header".into()))
}

/// Decode an IDX image buffer into flattened, `[0,1]`-normalized vectors.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<FeatureVector>> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(QelmError::Format(format!(
            "bad image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(QelmError::Format(format!(
            "expected 28x28 images, header says {rows}x{cols}"
        )));
    }
    let payload = &bytes[16..];
    let need = count * IMAGE_PIXELS;
    if payload.len() < need {
        return Err(QelmError::Length(format!(
            "image payload has {} bytes, header requires {need}",
            payload.len()
        )));
    }
    Ok(payload[..need]
        .chunks_exact(IMAGE_PIXELS)
        .map(|px| FeatureVector(px.iter().map(|&b| f64::from(b) / 255.0).collect()))
        .collect())
}

/// Decode an IDX label buffer.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(QelmError::Format(format!(
            "bad label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(QelmError::Length(format!(
            "label payload has {} bytes, header requires {count}",
            payload.len()
        )));
    }
    let labels = payload[..count].to_vec();
    if let Some((i, l)) = labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l as usize >= NUM_CLASSES)
    {
        return Err(QelmError::Data(format!("label {l} at index {i} out of range 0..=9")));
    }
    Ok(labels)
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    parse_idx_images(&read_all(path.as_ref())?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&read_all(path.as_ref())?)
}

/// Serialize images back to IDX bytes; pixels are quantized with `round(v*255)`.
pub fn encode_idx_images(images: &[FeatureVector]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * IMAGE_PIXELS);
    for word in [
        IMAGES_MAGIC,
        images.len() as u32,
        IMAGE_SIDE as u32,
        IMAGE_SIDE as u32,
    ] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    for img in images {
        out.extend(img.as_slice().iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Write a dataset as an uncompressed image/label IDX pair.
pub fn write_idx_dataset(
    dataset: &LabeledDataset,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    for (path, bytes) in [
        (images_path.as_ref(), encode_idx_images(dataset.images())),
        (labels_path.as_ref(), encode_idx_labels(dataset.labels())),
    ] {
        let mut w = BufWriter::new(File::create(path).map_err(|e| QelmError::io(path, e))?);
        w.write_all(&bytes)
            .and_then(|_| w.flush())
            .map_err(|e| QelmError::io(path, e))?;
    }
    Ok(())
}

/// Standard MNIST file names inside a data directory. Each may carry a `.gz`
/// suffix.
#[derive(Debug, Clone)]
pub struct IdxLayout {
    pub dir: PathBuf,
}

impl IdxLayout {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn resolve(&self, stem: &str) -> Result<PathBuf> {
        let plain = self.dir.join(stem);
        if plain.exists() {
            return Ok(plain);
        }
        let gz = self.dir.join(format!("{stem}.gz"));
        if gz.exists() {
            return Ok(gz);
        }
        Err(QelmError::io(
            plain,
            std::io::Error::new(std::io::ErrorKind::NotFound, "IDX file not found"),
        ))
    }

    pub fn load(&self, split: Split) -> Result<LabeledDataset> {
        let prefix = match split {
            Split::Train => "train",
            Split::Test => "t10k",
        };
        let images = load_idx_images(self.resolve(&format!("{prefix}-images-idx3-ubyte"))?)?;
        let labels = load_idx_labels(self.resolve(&format!("{prefix}-labels-idx1-ubyte"))?)?;
        assemble_dataset(images, labels, split)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_file(count: u32, fill: u8) -> Vec<u8> {
        let mut b = Vec::new();
        for w in [IMAGES_MAGIC, count, 28, 28] {
            b.extend_from_slice(&w.to_be_bytes());
        }
        b.extend(std::iter::repeat(fill).take(count as usize * IMAGE_PIXELS));
        b
    }

    #[test]
    fn header_count_gives_vector_count() {
        let imgs = parse_idx_images(&image_file(3, 0)).unwrap();
        assert_eq!(imgs.len(), 3);
        assert!(imgs.iter().all(|v| v.len() == 784));
        assert!(imgs[0].as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn byte_255_is_one() {
        let imgs = parse_idx_images(&image_file(1, 255)).unwrap();
        assert!(imgs[0].as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn wrong_magic_is_format_error() {
        let mut b = image_file(1, 0);
        b[3] = 0x01;
        assert!(matches!(parse_idx_images(&b), Err(QelmError::Format(_))));
        assert!(matches!(
            parse_idx_labels(&image_file(1, 0)),
            Err(QelmError::Format(_))
        ));
    }

    #[test]
    fn truncated_payload_is_length_error() {
        let mut b = image_file(2, 7);
        b.truncate(b.len() - 1);
        assert!(matches!(parse_idx_images(&b), Err(QelmError::Length(_))));
    }

    #[test]
    fn labels_parse_and_validate() {
        let mut b = encode_idx_labels(&[7, 0, 9]);
        assert_eq!(parse_idx_labels(&b).unwrap(), vec![7, 0, 9]);
        b[9] = 10;
        assert!(matches!(parse_idx_labels(&b), Err(QelmError::Data(_))));
        assert!(parse_idx_labels(&encode_idx_labels(&[])).unwrap().is_empty());
    }

    #[test]
    fn assembly_checks_lengths() {
        let imgs = parse_idx_images(&image_file(2, 1)).unwrap();
        assert!(matches!(
            assemble_dataset(imgs, vec![1], Split::Train),
            Err(QelmError::Length(_))
        ));
        let empty = assemble_dataset(vec![], vec![], Split::Test).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn subsample_is_deterministic() {
        let imgs: Vec<_> = (0..50)
            .map(|i| FeatureVector::new(vec![i as f64 / 50.0; 4]).unwrap())
            .collect();
        let labels = (0..50).map(|i| (i % 10) as u8).collect();
        let ds = assemble_dataset(imgs, labels, Split::Train).unwrap();
        let a = ds.subsample(8, 3);
        let b = ds.subsample(8, 3);
        assert_eq!(a.len(), 8);
        assert_eq!(a.labels(), b.labels());
        assert_eq!(a.images(), b.images());
        assert_ne!(ds.subsample(8, 4).images(), a.images());
    }

    #[test]
    fn gzip_is_transparent() {
        use flate2::write::GzEncoder;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::fast());
        enc.write_all(&image_file(2, 51)).unwrap();
        enc.finish().unwrap();
        let imgs = load_idx_images(&path).unwrap();
        assert_eq!(imgs.len(), 2);
        assert!((imgs[1].as_slice()[5] - 0.2).abs() < 1e-15);
    }
}
