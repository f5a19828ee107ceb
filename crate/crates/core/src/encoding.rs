//! Classical features → qubit register states.
//!
//! Basis convention: qubit 0 is the most significant bit of the
//! computational-basis index, so `|q0 q1 … q_{N-1}⟩` has index
//! `q0·2^{N-1} + … + q_{N-1}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::linalg::{C64, ZERO};
use crate::{QelmError, Result};

const NORM_TOL: f64 = 1e-12;

/// Unit-norm register state of `n_qubits` qubits (`2^n` amplitudes).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    n_qubits: usize,
}

impl StateVector {
    /// Wrap amplitudes, checking the length is a power of two and the norm
    /// is one within `1e-12`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(QelmError::InvalidArgument(format!(
                "state length {dim} is not a power of two"
            )));
        }
        let state = Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        };
        let dev = (state.norm_sqr() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(QelmError::InvalidArgument(format!(
                "state norm deviates from 1 by {dev:.3e}"
            )));
        }
        Ok(state)
    }

    /// Skip the norm check; used by evolution, which preserves norm by
    /// construction and checks it in bulk.
    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        let n_qubits = amplitudes.len().trailing_zeros() as usize;
        Self {
            amplitudes,
            n_qubits,
        }
    }

    /// `|index⟩` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self {
            amplitudes: amps,
            n_qubits,
        }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    /// Reduced density matrix of one qubit, `[[ρ00, ρ01], [ρ10, ρ11]]`.
    pub fn reduced_qubit(&self, qubit: usize) -> [[C64; 2]; 2] {
        let shift = self.n_qubits - 1 - qubit;
        let mask = 1usize << shift;
        let mut rho = [[ZERO; 2]; 2];
        for (idx, &a) in self.amplitudes.iter().enumerate() {
            if idx & mask != 0 {
                continue;
            }
            let b = self.amplitudes[idx | mask];
            rho[0][0] += a * a.conj();
            rho[0][1] += a * b.conj();
            rho[1][0] += b * a.conj();
            rho[1][1] += b * b.conj();
        }
        rho
    }

    /// `Tr ρ_q²` for the reduced state of `qubit`; 1 for product states.
    pub fn qubit_purity(&self, qubit: usize) -> f64 {
        let r = self.reduced_qubit(qubit);
        (r[0][0] * r[0][0] + r[0][1] * r[1][0] + r[1][0] * r[0][1] + r[1][1] * r[1][1]).re
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of one qubit.
    pub fn bloch_vector(&self, qubit: usize) -> [f64; 3] {
        let r = self.reduced_qubit(qubit);
        [2.0 * r[0][1].re, -2.0 * r[0][1].im, (r[0][0] - r[1][1]).re]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    Angle,
    DenseAngle,
    UniformBloch,
    General,
    Amplitude,
}

impl EncodingKind {
    pub const ALL: [EncodingKind; 5] = [
        EncodingKind::Angle,
        EncodingKind::DenseAngle,
        EncodingKind::UniformBloch,
        EncodingKind::General,
        EncodingKind::Amplitude,
    ];

    /// Latent dimension used for `n_qubits` qubits: one feature per qubit for
    /// angle encoding, two for everything else (amplitude included, for
    /// comparability).
    pub fn latent_dim(self, n_qubits: usize) -> usize {
        match self {
            EncodingKind::Angle => n_qubits,
            _ => 2 * n_qubits,
        }
    }

    pub fn is_product(self) -> bool {
        !matches!(self, EncodingKind::Amplitude)
    }

    pub fn name(self) -> &'static str {
        match self {
            EncodingKind::Angle => "angle",
            EncodingKind::DenseAngle => "dense_angle",
            EncodingKind::UniformBloch => "uniform_bloch",
            EncodingKind::General => "general",
            EncodingKind::Amplitude => "amplitude",
        }
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncodingKind {
    type Err = QelmError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        EncodingKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| QelmError::Config(format!("unknown encoding `{s}`")))
    }
}

/// Interval that phase features are mapped onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseRange {
    /// `[0, π]`: half of each Bloch sphere.
    #[default]
    Pi,
    /// `[0, 2π]`.
    TwoPi,
}

impl PhaseRange {
    pub fn upper(self) -> f64 {
        match self {
            PhaseRange::Pi => PI,
            PhaseRange::TwoPi => 2.0 * PI,
        }
    }
}

/// Per-feature affine map `[lo_k, hi_k] → [0, 1]` fitted on the train split.
/// Out-of-range values are clamped. Constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeMap {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl RangeMap {
    pub fn fit<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut it = rows.into_iter();
        let first = it
            .next()
            .ok_or_else(|| QelmError::InvalidArgument("cannot fit a range map on no rows".into()))?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for row in it {
            if row.len() != lo.len() {
                return Err(QelmError::DimensionMismatch {
                    expected: lo.len(),
                    got: row.len(),
                });
            }
            for (k, &v) in row.iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Unit-interval coordinate of feature `k`.
    pub fn unit(&self, k: usize, v: f64) -> f64 {
        let span = self.hi[k] - self.lo[k];
        if span <= 0.0 {
            0.0
        } else {
            ((v - self.lo[k]) / span).clamp(0.0, 1.0)
        }
    }
}

static DEGENERATE_PAIRS: AtomicU64 = AtomicU64::new(0);

/// Number of `(0, 0)` feature pairs the general encoding has mapped to `|0⟩`
/// since process start.
pub fn degenerate_pair_count() -> u64 {
    DEGENERATE_PAIRS.load(Ordering::Relaxed)
}

/// Tensor product of single-qubit states `(α_i, β_i)`, qubit 0 first (MSB).
fn product_state(qubits: &[[C64; 2]]) -> StateVector {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for q in qubits {
        let mut next = Vec::with_capacity(amps.len() * 2);
        for &a in &amps {
            next.push(a * q[0]);
            next.push(a * q[1]);
        }
        amps = next;
    }
    StateVector::from_raw(amps)
}

fn check_features(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(QelmError::Encoding(format!("non-finite feature at index {i}"))),
        None => Ok(()),
    }
}

/// Features as `(first, second)` pairs for two-per-qubit encodings; an odd
/// count `2n - 1` is padded with a trailing zero.
fn feature_pairs(x: &[f64], n_qubits: usize) -> Result<Vec<(f64, f64)>> {
    check_features(x)?;
    let m = x.len();
    if n_qubits == 0 || !(m == 2 * n_qubits || m + 1 == 2 * n_qubits) {
        return Err(QelmError::Encoding(format!(
            "{m} features cannot fill {n_qubits} qubits at two features per qubit"
        )));
    }
    Ok((0..n_qubits)
        .map(|i| (x[2 * i], x.get(2 * i + 1).copied().unwrap_or(0.0)))
        .collect())
}

/// `⊗ cos(θ_i/2)|0⟩ + e^{iφ_i} sin(θ_i/2)|1⟩` with `(θ_i, φ_i) = (x_{2i}, x_{2i+1})`.
pub fn encode_dense_angle(x: &[f64], n_qubits: usize) -> Result<StateVector> {
    let qubits: Vec<_> = feature_pairs(x, n_qubits)?
        .into_iter()
        .map(|(theta, phi)| {
            let (s, c) = (theta / 2.0).sin_cos();
            [C64::new(c, 0.0), C64::from_polar(s, phi)]
        })
        .collect();
    Ok(product_state(&qubits))
}

/// `⊗ cos(x_i/2)|0⟩ + sin(x_i/2)|1⟩`, one feature per qubit.
pub fn encode_angle(x: &[f64], n_qubits: usize) -> Result<StateVector> {
    check_features(x)?;
    if x.len() != n_qubits || n_qubits == 0 {
        return Err(QelmError::Encoding(format!(
            "angle encoding needs {n_qubits} features, got {}",
            x.len()
        )));
    }
    let qubits: Vec<_> = x
        .iter()
        .map(|&theta| {
            let (s, c) = (theta / 2.0).sin_cos();
            [C64::new(c, 0.0), C64::new(s, 0.0)]
        })
        .collect();
    Ok(product_state(&qubits))
}

/// `⊗ √p_i|0⟩ + e^{iφ_i} √(1-p_i)|1⟩`; populations must lie in `[0, 1]`.
pub fn encode_uniform_bloch(x: &[f64], n_qubits: usize) -> Result<StateVector> {
    let pairs = feature_pairs(x, n_qubits)?;
    let mut qubits = Vec::with_capacity(pairs.len());
    for (i, (p, phi)) in pairs.into_iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(QelmError::Encoding(format!(
                "population feature {p} of qubit {i} outside [0,1]"
            )));
        }
        qubits.push([C64::new(p.sqrt(), 0.0), C64::from_polar((1.0 - p).sqrt(), phi)]);
    }
    Ok(product_state(&qubits))
}

/// `⊗ (a_i|0⟩ + b_i|1⟩)/√(a_i²+b_i²)` with pair features in `[0, 1]`.
/// A `(0, 0)` pair becomes `|0⟩` and bumps [`degenerate_pair_count`].
pub fn encode_general(x: &[f64], n_qubits: usize) -> Result<StateVector> {
    let pairs = feature_pairs(x, n_qubits)?;
    let mut qubits = Vec::with_capacity(pairs.len());
    for (i, (a, b)) in pairs.into_iter().enumerate() {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(QelmError::Encoding(format!(
                "pair ({a}, {b}) of qubit {i} outside [0,1]"
            )));
        }
        let norm = a.hypot(b);
        if norm == 0.0 {
            DEGENERATE_PAIRS.fetch_add(1, Ordering::Relaxed);
            log::debug!("general encoding: degenerate (0,0) pair on qubit {i}, using |0>");
            qubits.push([C64::new(1.0, 0.0), ZERO]);
        } else {
            qubits.push([C64::new(a / norm, 0.0), C64::new(b / norm, 0.0)]);
        }
    }
    Ok(product_state(&qubits))
}

/// `Σ x_i |i⟩ / ‖x‖₂` over the first `M ≤ 2^N` basis states.
pub fn encode_amplitude(x: &[f64], n_qubits: usize) -> Result<StateVector> {
    check_features(x)?;
    let dim = 1usize << n_qubits;
    if x.is_empty() || x.len() > dim {
        return Err(QelmError::Encoding(format!(
            "amplitude encoding needs 1..={dim} features, got {}",
            x.len()
        )));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(QelmError::Encoding("cannot amplitude-encode the zero vector".into()));
    }
    let mut amps = vec![ZERO; dim];
    for (a, &v) in amps.iter_mut().zip(x) {
        *a = C64::new(v / norm, 0.0);
    }
    Ok(StateVector::from_raw(amps))
}

/// Everything needed to turn a latent vector into a register state:
/// encoding kind, register size, and the train-split range statistics used
/// to map each feature onto its target interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub kind: EncodingKind,
    pub n_qubits: usize,
    pub phase_range: PhaseRange,
    /// `None` means features are used as given (amplitude encoding).
    pub range: Option<RangeMap>,
}

impl EncodingSpec {
    /// Feature counts this spec accepts.
    pub fn accepts(kind: EncodingKind, n_qubits: usize, m: usize) -> bool {
        match kind {
            EncodingKind::Angle => m == n_qubits,
            EncodingKind::Amplitude => m >= 1 && m <= 1 << n_qubits,
            _ => m == 2 * n_qubits || m + 1 == 2 * n_qubits,
        }
    }

    /// Fit the per-feature range map on train latents. Amplitude encoding
    /// uses features unmapped.
    pub fn fit<'a, I>(
        kind: EncodingKind,
        n_qubits: usize,
        phase_range: PhaseRange,
        train: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        if n_qubits == 0 {
            return Err(QelmError::InvalidArgument("need at least one qubit".into()));
        }
        let range = match kind {
            EncodingKind::Amplitude => None,
            _ => Some(RangeMap::fit(train)?),
        };
        if let Some(r) = &range {
            if !Self::accepts(kind, n_qubits, r.dim()) {
                return Err(QelmError::Encoding(format!(
                    "{kind} encoding on {n_qubits} qubits cannot take {} features",
                    r.dim()
                )));
            }
        }
        Ok(Self {
            kind,
            n_qubits,
            phase_range,
            range,
        })
    }

    /// Target interval of feature `k` (0-based) for this encoding.
    pub fn target_interval(&self, k: usize) -> (f64, f64) {
        let polar_slot = k % 2 == 0;
        match self.kind {
            EncodingKind::Angle => (0.0, PI),
            EncodingKind::DenseAngle if polar_slot => (0.0, PI),
            EncodingKind::DenseAngle | EncodingKind::UniformBloch => {
                if polar_slot {
                    (0.0, 1.0)
                } else {
                    (0.0, self.phase_range.upper())
                }
            }
            EncodingKind::General | EncodingKind::Amplitude => (0.0, 1.0),
        }
    }

    /// Apply the range map: each feature lands in its target interval.
    pub fn map_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_features(x)?;
        match &self.range {
            None => Ok(x.to_vec()),
            Some(r) => {
                if x.len() != r.dim() {
                    return Err(QelmError::DimensionMismatch {
                        expected: r.dim(),
                        got: x.len(),
                    });
                }
                Ok(x.iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let (a, b) = self.target_interval(k);
                        a + (b - a) * r.unit(k, v)
                    })
                    .collect())
            }
        }
    }

    pub fn encode(&self, latent: &[f64]) -> Result<StateVector> {
        let x = self.map_features(latent)?;
        encode_mapped(self.kind, &x, self.n_qubits)
    }
}

/// Dispatch to the encoder for `kind` on already-mapped features.
pub fn encode_mapped(kind: EncodingKind, x: &[f64], n_qubits: usize) -> Result<StateVector> {
    match kind {
        EncodingKind::Angle => encode_angle(x, n_qubits),
        EncodingKind::DenseAngle => encode_dense_angle(x, n_qubits),
        EncodingKind::UniformBloch => encode_uniform_bloch(x, n_qubits),
        EncodingKind::General => encode_general(x, n_qubits),
        EncodingKind::Amplitude => encode_amplitude(x, n_qubits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn close(state: &StateVector, want: &[C64]) -> bool {
        state
            .amplitudes()
            .iter()
            .zip(want)
            .all(|(a, b)| (a - b).norm() < 1e-12)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dense_angle_examples() {
        assert!(close(&encode_dense_angle(&[0.0, 1.234], 1).unwrap(), &[c(1., 0.), c(0., 0.)]));
        assert!(close(&encode_dense_angle(&[PI, 0.0], 1).unwrap(), &[c(0., 0.), c(1., 0.)]));
        let s = encode_dense_angle(&[FRAC_PI_2, FRAC_PI_2], 1).unwrap();
        assert!(close(&s, &[c(FRAC_1_SQRT_2, 0.), c(0., FRAC_1_SQRT_2)]));
        assert!(encode_dense_angle(&[0.1, 0.2, 0.3], 1).is_err());
    }

    #[test]
    fn angle_examples() {
        let zero = encode_angle(&[0.0; 3], 3).unwrap();
        assert!(close(&zero, &StateVector::basis(3, 0).into_amplitudes()));
        let ones = encode_angle(&[PI, PI], 2).unwrap();
        assert!(close(&ones, &StateVector::basis(2, 3).into_amplitudes()));
        let any = encode_angle(&[0.3, 2.0, 1.1], 3).unwrap();
        assert!(any.amplitudes().iter().all(|a| a.im == 0.0));
        assert!(encode_angle(&[0.3], 2).is_err());
    }

    #[test]
    fn uniform_bloch_examples() {
        assert!(close(&encode_uniform_bloch(&[1.0, 2.5], 1).unwrap(), &[c(1., 0.), c(0., 0.)]));
        assert!(close(&encode_uniform_bloch(&[0.0, 0.0], 1).unwrap(), &[c(0., 0.), c(1., 0.)]));
        let s = encode_uniform_bloch(&[0.5, 0.0], 1).unwrap();
        assert!(close(&s, &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)]));
        assert!(matches!(
            encode_uniform_bloch(&[1.2, 0.0], 1),
            Err(QelmError::Encoding(_))
        ));
    }

    #[test]
    fn general_examples() {
        let s = encode_general(&[1.0, 1.0], 1).unwrap();
        assert!(close(&s, &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)]));
        assert!(close(&encode_general(&[1.0, 0.0], 1).unwrap(), &[c(1., 0.), c(0., 0.)]));
        let a = encode_general(&[0.2, 0.4], 1).unwrap();
        let b = encode_general(&[0.4, 0.8], 1).unwrap();
        assert!(close(&a, b.amplitudes()));
    }

    #[test]
    fn general_degenerate_pair_maps_to_zero_state() {
        let before = degenerate_pair_count();
        let s = encode_general(&[0.0, 0.0, 1.0, 0.0], 2).unwrap();
        assert!(close(&s, &StateVector::basis(2, 0).into_amplitudes()));
        assert!(degenerate_pair_count() > before);
    }

    #[test]
    fn amplitude_examples() {
        let e2 = encode_amplitude(&[0.0, 0.0, 3.0, 0.0], 2).unwrap();
        assert!(close(&e2, &StateVector::basis(2, 2).into_amplitudes()));
        let u = encode_amplitude(&[1.0; 4], 2).unwrap();
        assert!(u.amplitudes().iter().all(|a| (a - c(0.5, 0.0)).norm() < 1e-15));
        let pad = encode_amplitude(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(pad.amplitudes()[3], ZERO);
        assert!(matches!(encode_amplitude(&[0.0; 3], 2), Err(QelmError::Encoding(_))));
        assert!(encode_amplitude(&[1.0; 5], 2).is_err());
    }

    #[test]
    fn odd_feature_count_is_padded_with_zero() {
        let odd = encode_dense_angle(&[0.4, 0.9, 1.3], 2).unwrap();
        let padded = encode_dense_angle(&[0.4, 0.9, 1.3, 0.0], 2).unwrap();
        assert_eq!(odd, padded);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // qubit 0 flipped, qubit 1 untouched → |10⟩ = index 2
        let s = encode_angle(&[PI, 0.0], 2).unwrap();
        assert!((s.amplitudes()[2].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn range_map_hits_interval_endpoints() {
        let rows = [vec![0.2, 5.0], vec![0.6, -1.0], vec![0.4, 2.0]];
        let spec = EncodingSpec::fit(
            EncodingKind::DenseAngle,
            1,
            PhaseRange::Pi,
            rows.iter().map(Vec::as_slice),
        )
        .unwrap();
        assert_eq!(spec.map_features(&[0.2, -1.0]).unwrap(), vec![0.0, 0.0]);
        let top = spec.map_features(&[0.6, 5.0]).unwrap();
        assert!((top[0] - PI).abs() < 1e-15 && (top[1] - PI).abs() < 1e-15);
        // out of train range clamps
        assert_eq!(spec.map_features(&[-3.0, 9.0]).unwrap()[1], PI);
        let two_pi = EncodingSpec {
            phase_range: PhaseRange::TwoPi,
            ..spec.clone()
        };
        assert!((two_pi.map_features(&[0.6, 5.0]).unwrap()[1] - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("dense-angle".parse::<EncodingKind>().unwrap(), EncodingKind::DenseAngle);
        assert_eq!("uniform_bloch".parse::<EncodingKind>().unwrap(), EncodingKind::UniformBloch);
        assert!("bloch".parse::<EncodingKind>().is_err());
        assert_eq!(EncodingKind::Angle.latent_dim(7), 7);
        assert_eq!(EncodingKind::Amplitude.latent_dim(7), 14);
    }
}
