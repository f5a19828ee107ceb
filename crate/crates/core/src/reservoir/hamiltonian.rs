//! The six reservoir Hamiltonian families.
//!
//! | family | structure | evolution |
//! |---|---|---|
//! | H1 | `B1 Σ X_i` / `Σ_{i<j} J0/|i-j|^α Z_i Z_j`, alternating | 50 Floquet periods, `T = 2·T1 = 1` |
//! | H2 | all-to-all `J_ij Z_i Z_j` + `B_i X_i`, Gaussian draws | `Δt = 20` |
//! | H3 | nearest-neighbour `J3 ZZ` + `B3z Z` + `B3x X` | `Δt = 20` |
//! | H4 | XXZ chain with longitudinal field | `Δt = 20` |
//! | H5 | XX chain | `Δt = 20` |
//! | H6 | all-to-all uniform `J_ij X_i X_j` + disordered `Z` field | `Δt = 20` |
//!
//! Pair sums run over unordered pairs `i < j`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::pauli::{dense_from_terms, Pauli, PauliTerm};
use crate::linalg::{hermiticity_error, CMatrix};
use crate::{QelmError, Result};

pub const H1_B: f64 = 3.05;
pub const H1_J0: f64 = 0.06;
pub const H1_ALPHA: f64 = 1.51;
/// Half period `T1`; the full drive period is `T = 2·T1 = 1`.
pub const H1_HALF_PERIOD: f64 = 0.5;
pub const H1_PERIODS: u32 = 50;

pub const H2_J_MEAN: f64 = 0.75;
pub const H2_J_STD: f64 = 0.1;
pub const H2_B_MEAN: f64 = 1.0;
pub const H2_B_STD: f64 = 0.1;

pub const H3_J: f64 = -1.0;
pub const H3_BX: f64 = 0.7;
pub const H3_BZ: f64 = 1.5;

pub const H4_JX: f64 = 2.0;
pub const H4_JY: f64 = 2.0;
pub const H4_JZ: f64 = 0.54;
pub const H4_BZ: f64 = 0.54;

pub const H6_J_HALF_WIDTH: f64 = 0.5;

/// Evolution time used by every time-independent family.
pub const STATIC_EVOLUTION_TIME: f64 = 20.0;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl Boundary {
    /// Nearest-neighbour bonds `(i, i+1)`; periodic adds `(N-1, 0)` for
    /// `N ≥ 3`.
    pub fn bonds(self, n_qubits: usize) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..n_qubits.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self == Boundary::Periodic && n_qubits >= 3 {
            b.push((n_qubits - 1, 0));
        }
        b
    }
}

impl FromStr for Boundary {
    type Err = QelmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            _ => Err(QelmError::Config(format!("unknown boundary `{s}`"))),
        }
    }
}

/// Disorder regimes of H6: `(B6, W)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderRegime {
    /// `B6 = W = 0.02`.
    Localized,
    /// `B6 = 0.03`, `W = 1`.
    Transition,
    /// `B6 = 0.03`, `W = 60`.
    Mbl,
}

impl DisorderRegime {
    pub fn field_and_width(self) -> (f64, f64) {
        match self {
            DisorderRegime::Localized => (2e-2, 2e-2),
            DisorderRegime::Transition => (0.03, 1.0),
            DisorderRegime::Mbl => (0.03, 60.0),
        }
    }
}

/// Identifies a reservoir family (and H6 regime / H2 control variant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HamiltonianKind {
    H1,
    H2,
    /// H2 with every `J_ij = 0`: independent spins in a transverse field.
    H2NoCoupling,
    H3,
    H4,
    H5,
    H6(DisorderRegime),
}

impl HamiltonianKind {
    pub const ALL: [HamiltonianKind; 9] = [
        HamiltonianKind::H1,
        HamiltonianKind::H2,
        HamiltonianKind::H2NoCoupling,
        HamiltonianKind::H3,
        HamiltonianKind::H4,
        HamiltonianKind::H5,
        HamiltonianKind::H6(DisorderRegime::Localized),
        HamiltonianKind::H6(DisorderRegime::Transition),
        HamiltonianKind::H6(DisorderRegime::Mbl),
    ];

    pub fn name(self) -> &'static str {
        match self {
            HamiltonianKind::H1 => "h1",
            HamiltonianKind::H2 => "h2",
            HamiltonianKind::H2NoCoupling => "h2-j0",
            HamiltonianKind::H3 => "h3",
            HamiltonianKind::H4 => "h4",
            HamiltonianKind::H5 => "h5",
            HamiltonianKind::H6(DisorderRegime::Localized) => "h6-localized",
            HamiltonianKind::H6(DisorderRegime::Transition) => "h6-transition",
            HamiltonianKind::H6(DisorderRegime::Mbl) => "h6-mbl",
        }
    }

    pub fn is_floquet(self) -> bool {
        self == HamiltonianKind::H1
    }

    /// Whether construction draws random couplings from the seed.
    pub fn is_seeded(self) -> bool {
        matches!(
            self,
            HamiltonianKind::H2 | HamiltonianKind::H2NoCoupling | HamiltonianKind::H6(_)
        )
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HamiltonianKind {
    type Err = QelmError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match norm.as_str() {
            "h2-nocoupling" | "h2-j2=0" | "h2-j2-0" => "h2-j0",
            "h6-mbl-region" => "h6-mbl",
            other => other,
        };
        HamiltonianKind::ALL
            .into_iter()
            .find(|k| k.name() == alias)
            .ok_or_else(|| QelmError::Config(format!("unknown Hamiltonian `{s}`")))
    }
}

/// Provenance of a constructed operator: family, seed and every scalar.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamRecord {
    pub family: String,
    pub seed: Option<u64>,
    pub scalars: BTreeMap<String, f64>,
}

impl ParamRecord {
    pub fn new(family: &str, seed: Option<u64>) -> Self {
        Self {
            family: family.to_string(),
            seed,
            scalars: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, v: f64) -> Self {
        self.scalars.insert(key.into(), v);
        self
    }
}

/// Dense Hermitian operator on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    n_qubits: usize,
    params: ParamRecord,
}

impl HermitianOperator {
    /// Fails if `max |M - M†| > 1e-12` or the size is not `2^N`.
    pub fn new(matrix: CMatrix, params: ParamRecord) -> Result<Self> {
        let dim = matrix.nrows();
        if !matrix.is_square() || dim == 0 || !dim.is_power_of_two() {
            return Err(QelmError::InvalidArgument(format!(
                "operator must be 2^N x 2^N, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let err = hermiticity_error(&matrix);
        if err > HERMITIAN_TOL {
            return Err(QelmError::Linalg(format!(
                "operator is not Hermitian (max |H - H†| = {err:.3e})"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
            params,
        })
    }

    pub fn from_terms(n_qubits: usize, terms: &[PauliTerm], params: ParamRecord) -> Result<Self> {
        Self::new(dense_from_terms(n_qubits, terms)?, params)
    }

    pub fn zero(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            matrix: CMatrix::zeros(dim, dim),
            n_qubits,
            params: ParamRecord::new("zero", None),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn params(&self) -> &ParamRecord {
        &self.params
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

/// Unit-coefficient Pauli string as an operator.
pub fn pauli_string(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<HermitianOperator> {
    let label = ops
        .iter()
        .map(|(q, p)| format!("{p}{q}"))
        .collect::<Vec<_>>()
        .join(" ");
    HermitianOperator::from_terms(
        n_qubits,
        &[PauliTerm::new(1.0, ops.to_vec())],
        ParamRecord::new(&format!("pauli[{label}]"), None),
    )
}

fn unordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn check_qubits(n_qubits: usize, min: usize) -> Result<()> {
    if n_qubits < min {
        return Err(QelmError::InvalidArgument(format!(
            "need at least {min} qubit(s), got {n_qubits}"
        )));
    }
    if n_qubits > 14 {
        return Err(QelmError::InvalidArgument(format!(
            "{n_qubits} qubits exceeds the dense-simulation limit of 14"
        )));
    }
    Ok(())
}

/// Drive half of H1: `B1 Σ_i X_i`.
pub fn h1_drive(n_qubits: usize) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 1)?;
    let terms: Vec<_> = (0..n_qubits)
        .map(|i| PauliTerm::new(H1_B, vec![(i, Pauli::X)]))
        .collect();
    HermitianOperator::from_terms(n_qubits, &terms, ParamRecord::new("h1a", None).with("B1", H1_B))
}

/// H1 long-range coupling `J0 / |i-j|^α`.
pub fn h1_coupling(i: usize, j: usize) -> f64 {
    H1_J0 / (i.abs_diff(j) as f64).powf(H1_ALPHA)
}

/// Interaction half of H1: `Σ_{i<j} J0/|i-j|^α Z_i Z_j`.
pub fn h1_interaction(n_qubits: usize) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 2)?;
    let terms: Vec<_> = unordered_pairs(n_qubits)
        .map(|(i, j)| PauliTerm::new(h1_coupling(i, j), vec![(i, Pauli::Z), (j, Pauli::Z)]))
        .collect();
    HermitianOperator::from_terms(
        n_qubits,
        &terms,
        ParamRecord::new("h1b", None)
            .with("J0", H1_J0)
            .with("alpha", H1_ALPHA),
    )
}

/// `(Ha, Hb)` for the periodically driven H1.
pub fn build_h1_pair(n_qubits: usize) -> Result<(HermitianOperator, HermitianOperator)> {
    Ok((h1_drive(n_qubits)?, h1_interaction(n_qubits)?))
}

/// Explicit H2 couplings: `pair_couplings` in `i<j` lexicographic order,
/// one `fields` entry per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseIsingCouplings {
    pub pair_couplings: Vec<f64>,
    pub fields: Vec<f64>,
}

impl TransverseIsingCouplings {
    /// Gaussian draws. Couplings are drawn before fields, so the zero-coupling
    /// control shares its fields with the interacting reservoir of the same seed.
    pub fn sample(n_qubits: usize, seed: u64, zero_coupling: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = Normal::new(H2_J_MEAN, H2_J_STD).expect("valid normal");
        let b = Normal::new(H2_B_MEAN, H2_B_STD).expect("valid normal");
        let mut pair_couplings: Vec<f64> =
            unordered_pairs(n_qubits).map(|_| j.sample(&mut rng)).collect();
        let fields = (0..n_qubits).map(|_| b.sample(&mut rng)).collect();
        if zero_coupling {
            pair_couplings.iter_mut().for_each(|x| *x = 0.0);
        }
        Self {
            pair_couplings,
            fields,
        }
    }

    pub fn uniform(n_qubits: usize, coupling: f64, field: f64) -> Self {
        Self {
            pair_couplings: vec![coupling; n_qubits * n_qubits.saturating_sub(1) / 2],
            fields: vec![field; n_qubits],
        }
    }
}

/// `Σ_{i<j} J_ij Z_i Z_j + Σ_i B_i X_i` from explicit couplings.
pub fn build_h2_from(
    n_qubits: usize,
    c: &TransverseIsingCouplings,
    params: ParamRecord,
) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 1)?;
    let want_pairs = n_qubits * (n_qubits - 1) / 2;
    if c.pair_couplings.len() != want_pairs || c.fields.len() != n_qubits {
        return Err(QelmError::InvalidArgument(format!(
            "H2 on {n_qubits} qubits needs {want_pairs} couplings and {n_qubits} fields"
        )));
    }
    let mut terms: Vec<_> = unordered_pairs(n_qubits)
        .zip(&c.pair_couplings)
        .filter(|(_, &jij)| jij != 0.0)
        .map(|((i, j), &jij)| PauliTerm::new(jij, vec![(i, Pauli::Z), (j, Pauli::Z)]))
        .collect();
    terms.extend(
        c.fields
            .iter()
            .enumerate()
            .map(|(i, &bi)| PauliTerm::new(bi, vec![(i, Pauli::X)])),
    );
    HermitianOperator::from_terms(n_qubits, &terms, params)
}

/// H2 with seeded Gaussian couplings `J ~ N(0.75, 0.1)`, `B ~ N(1, 0.1)`.
pub fn build_h2(n_qubits: usize, seed: u64, zero_coupling: bool) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 1)?;
    let c = TransverseIsingCouplings::sample(n_qubits, seed, zero_coupling);
    let family = if zero_coupling { "h2-j0" } else { "h2" };
    let mut params = ParamRecord::new(family, Some(seed))
        .with("J_mean", if zero_coupling { 0.0 } else { H2_J_MEAN })
        .with("J_std", if zero_coupling { 0.0 } else { H2_J_STD })
        .with("B_mean", H2_B_MEAN)
        .with("B_std", H2_B_STD);
    for ((i, j), v) in unordered_pairs(n_qubits).zip(&c.pair_couplings) {
        params.scalars.insert(format!("J_{i}_{j}"), *v);
    }
    for (i, v) in c.fields.iter().enumerate() {
        params.scalars.insert(format!("B_{i}"), *v);
    }
    build_h2_from(n_qubits, &c, params)
}

/// `J3 Σ Z_i Z_{i+1} + B3z Σ Z_i + B3x Σ X_i` (open chain).
pub fn build_h3(n_qubits: usize) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 1)?;
    let mut terms: Vec<_> = Boundary::Open
        .bonds(n_qubits)
        .into_iter()
        .map(|(i, j)| PauliTerm::new(H3_J, vec![(i, Pauli::Z), (j, Pauli::Z)]))
        .collect();
    for i in 0..n_qubits {
        terms.push(PauliTerm::new(H3_BZ, vec![(i, Pauli::Z)]));
        terms.push(PauliTerm::new(H3_BX, vec![(i, Pauli::X)]));
    }
    HermitianOperator::from_terms(
        n_qubits,
        &terms,
        ParamRecord::new("h3", None)
            .with("J3", H3_J)
            .with("B3x", H3_BX)
            .with("B3z", H3_BZ),
    )
}

/// `-½ [Σ_bonds (Jx XX + Jy YY + Jz ZZ) + Bz Σ_i Z_i]`. The field acts on every
/// site regardless of boundary.
pub fn build_h4(n_qubits: usize, boundary: Boundary) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 1)?;
    let mut terms = Vec::new();
    for (i, j) in boundary.bonds(n_qubits) {
        for (coeff, p) in [(H4_JX, Pauli::X), (H4_JY, Pauli::Y), (H4_JZ, Pauli::Z)] {
            terms.push(PauliTerm::new(-0.5 * coeff, vec![(i, p), (j, p)]));
        }
    }
    for i in 0..n_qubits {
        terms.push(PauliTerm::new(-0.5 * H4_BZ, vec![(i, Pauli::Z)]));
    }
    HermitianOperator::from_terms(
        n_qubits,
        &terms,
        ParamRecord::new("h4", None)
            .with("J4x", H4_JX)
            .with("J4y", H4_JY)
            .with("J4z", H4_JZ)
            .with("B4z", H4_BZ)
            .with("periodic", f64::from(u8::from(boundary == Boundary::Periodic))),
    )
}

/// `½ Σ_bonds (XX + YY)`.
pub fn build_h5(n_qubits: usize, boundary: Boundary) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 1)?;
    let mut terms = Vec::new();
    for (i, j) in boundary.bonds(n_qubits) {
        terms.push(PauliTerm::new(0.5, vec![(i, Pauli::X), (j, Pauli::X)]));
        terms.push(PauliTerm::new(0.5, vec![(i, Pauli::Y), (j, Pauli::Y)]));
    }
    HermitianOperator::from_terms(
        n_qubits,
        &terms,
        ParamRecord::new("h5", None)
            .with("periodic", f64::from(u8::from(boundary == Boundary::Periodic))),
    )
}

/// Seeded H6 draws: `J_ij ~ U[-0.5, 0.5]` over `i<j`, then `D_i ~ U[-W, W]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderedCouplings {
    pub pair_couplings: Vec<f64>,
    pub disorder: Vec<f64>,
}

impl DisorderedCouplings {
    pub fn sample(n_qubits: usize, width: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = Uniform::new_inclusive(-H6_J_HALF_WIDTH, H6_J_HALF_WIDTH).expect("valid range");
        let d = Uniform::new_inclusive(-width, width).expect("valid range");
        let pair_couplings = unordered_pairs(n_qubits).map(|_| j.sample(&mut rng)).collect();
        let disorder = (0..n_qubits).map(|_| d.sample(&mut rng)).collect();
        Self {
            pair_couplings,
            disorder,
        }
    }
}

/// `Σ_{i<j} J_ij X_i X_j + ½ Σ_i (B6 + D_i) Z_i`.
pub fn build_h6(n_qubits: usize, regime: DisorderRegime, seed: u64) -> Result<HermitianOperator> {
    check_qubits(n_qubits, 1)?;
    let (field, width) = regime.field_and_width();
    let c = DisorderedCouplings::sample(n_qubits, width, seed);
    build_h6_from(n_qubits, field, &c, regime, seed)
}

pub fn build_h6_from(
    n_qubits: usize,
    field: f64,
    c: &DisorderedCouplings,
    regime: DisorderRegime,
    seed: u64,
) -> Result<HermitianOperator> {
    let mut terms: Vec<_> = unordered_pairs(n_qubits)
        .zip(&c.pair_couplings)
        .map(|((i, j), &jij)| PauliTerm::new(jij, vec![(i, Pauli::X), (j, Pauli::X)]))
        .collect();
    terms.extend(
        c.disorder
            .iter()
            .enumerate()
            .map(|(i, &di)| PauliTerm::new(0.5 * (field + di), vec![(i, Pauli::Z)])),
    );
    let (_, width) = regime.field_and_width();
    let mut params = ParamRecord::new(HamiltonianKind::H6(regime).name(), Some(seed))
        .with("B6", field)
        .with("W", width);
    for ((i, j), v) in unordered_pairs(n_qubits).zip(&c.pair_couplings) {
        params.scalars.insert(format!("J_{i}_{j}"), *v);
    }
    for (i, v) in c.disorder.iter().enumerate() {
        params.scalars.insert(format!("D_{i}"), *v);
    }
    HermitianOperator::from_terms(n_qubits, &terms, params)
}

/// Build the static Hamiltonian of `kind`. H1 is time-dependent; use
/// [`build_h1_pair`] for it.
pub fn build_static(
    kind: HamiltonianKind,
    n_qubits: usize,
    seed: u64,
    boundary: Boundary,
) -> Result<HermitianOperator> {
    match kind {
        HamiltonianKind::H1 => Err(QelmError::InvalidArgument(
            "H1 is periodically driven; build its (Ha, Hb) pair".into(),
        )),
        HamiltonianKind::H2 => build_h2(n_qubits, seed, false),
        HamiltonianKind::H2NoCoupling => build_h2(n_qubits, seed, true),
        HamiltonianKind::H3 => build_h3(n_qubits),
        HamiltonianKind::H4 => build_h4(n_qubits, boundary),
        HamiltonianKind::H5 => build_h5(n_qubits, boundary),
        HamiltonianKind::H6(regime) => build_h6(n_qubits, regime, seed),
    }
}
