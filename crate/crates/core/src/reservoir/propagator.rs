//! Exact propagators `exp(-iHΔt)` and state evolution.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{HermitianOperator, H1_HALF_PERIOD};
use crate::encoding::StateVector;
use crate::linalg::{hermitian_eigen, is_real, CMatrix, SplitMatrix, C64};
use crate::{QelmError, Result};

const EIGEN_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum Recipe {
    Identity,
    SingleExponential,
    FloquetPeriodPower { periods: u32, half_period: f64 },
}

/// Unitary `U` on `2^N` amplitudes together with how it was built.
#[derive(Debug, Clone)]
pub struct UnitaryPropagator {
    split: SplitMatrix,
    total_time: f64,
    recipe: Recipe,
}

impl UnitaryPropagator {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            split: SplitMatrix::identity(1 << n_qubits),
            total_time: 0.0,
            recipe: Recipe::Identity,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        self.split.to_complex()
    }

    pub fn split(&self) -> &SplitMatrix {
        &self.split
    }

    pub fn dim(&self) -> usize {
        self.split.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn recipe(&self) -> Recipe {
        self.recipe
    }

    /// `max |U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let u = &self.split;
        // U†U = (Rᵀ - iIᵀ)(R + iI) = (RᵀR + IᵀI) + i(RᵀI - IᵀR)
        let mut re = u.re.tr_mul(&u.re);
        re.gemm_tr(1.0, &u.im, &u.im, 1.0);
        let mut im = u.re.tr_mul(&u.im);
        im.gemm_tr(-1.0, &u.im, &u.re, 1.0);
        let n = self.dim();
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max(C64::new(re[(r, c)] - target, im[(r, c)]).norm());
            }
        }
        worst
    }

    /// `ψ' = Uψ`.
    pub fn evolve(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(QelmError::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        let (re, im) = split_columns(std::slice::from_ref(psi));
        let (out_re, out_im) = self.apply_split(&re, &im);
        Ok(StateVector::from_raw(
            (0..self.dim())
                .map(|k| C64::new(out_re[(k, 0)], out_im[(k, 0)]))
                .collect(),
        ))
    }

    fn apply_split(&self, re: &DMatrix<f64>, im: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let u = &self.split;
        let mut out_re = &u.re * re;
        out_re.gemm(-1.0, &u.im, im, 1.0);
        let mut out_im = &u.re * im;
        out_im.gemm(1.0, &u.im, re, 1.0);
        (out_re, out_im)
    }

    /// Evolve many states with one matrix product per block, returning
    /// `|⟨k|Uψ⟩|²` per state (samples as columns, `2^N` rows). Blocks run in
    /// parallel when the `parallel` feature is on; output order matches input.
    pub fn evolve_probabilities(&self, states: &[StateVector]) -> Result<DMatrix<f64>> {
        const BLOCK: usize = 256;
        if let Some(bad) = states.iter().find(|s| s.dim() != self.dim()) {
            return Err(QelmError::DimensionMismatch {
                expected: self.dim(),
                got: bad.dim(),
            });
        }
        let run = |chunk: &[StateVector]| -> DMatrix<f64> {
            let (re, im) = split_columns(chunk);
            let (a, b) = self.apply_split(&re, &im);
            a.zip_map(&b, |x, y| x * x + y * y)
        };
        let blocks: Vec<DMatrix<f64>> = {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                states.par_chunks(BLOCK).map(run).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                states.chunks(BLOCK).map(run).collect()
            }
        };
        let mut out = DMatrix::zeros(self.dim(), states.len());
        let mut col = 0;
        for b in blocks {
            out.columns_mut(col, b.ncols()).copy_from(&b);
            col += b.ncols();
        }
        Ok(out)
    }
}

fn split_columns(states: &[StateVector]) -> (DMatrix<f64>, DMatrix<f64>) {
    let dim = states.first().map_or(0, StateVector::dim);
    let re = DMatrix::from_fn(dim, states.len(), |r, c| states[c].amplitudes()[r].re);
    let im = DMatrix::from_fn(dim, states.len(), |r, c| states[c].amplitudes()[r].im);
    (re, im)
}

/// `exp(-iH t)` via `H = V Λ V†`.
fn exponentiate(h: &HermitianOperator, t: f64) -> Result<SplitMatrix> {
    let (values, vectors) = hermitian_eigen(h.matrix(), EIGEN_HERMITIAN_TOL)?;
    let n = h.dim();
    let (sin, cos): (Vec<f64>, Vec<f64>) = values.iter().map(|&l| (l * t).sin_cos()).unzip();
    if is_real(&vectors) {
        let v = vectors.map(|z| z.re);
        let scale = |d: &[f64]| {
            let mut m = v.clone();
            for (c, &s) in d.iter().enumerate() {
                m.column_mut(c).scale_mut(s);
            }
            m
        };
        // V diag(e^{-iλt}) Vᵀ = V diag(cos) Vᵀ - i V diag(sin) Vᵀ
        let re = scale(&cos) * v.transpose();
        let im = -(scale(&sin) * v.transpose());
        Ok(SplitMatrix { re, im })
    } else {
        let mut left = vectors.clone();
        for c in 0..n {
            let phase = C64::new(cos[c], -sin[c]);
            left.column_mut(c).apply(|z| *z *= phase);
        }
        Ok(SplitMatrix::from_complex(&left).mul(&SplitMatrix::from_complex(&vectors.adjoint())))
    }
}

/// `exp(-iHΔt)`.
pub fn propagator_static(h: &HermitianOperator, dt: f64) -> Result<UnitaryPropagator> {
    if dt == 0.0 {
        return Ok(UnitaryPropagator::identity(h.n_qubits()));
    }
    Ok(UnitaryPropagator {
        split: exponentiate(h, dt)?,
        total_time: dt,
        recipe: Recipe::SingleExponential,
    })
}

/// `[exp(-iHb·T1) exp(-iHa·T1)]^periods` with `T1 = 0.5`: each period applies
/// `Ha` first, then `Hb`.
pub fn propagator_floquet_h1(
    ha: &HermitianOperator,
    hb: &HermitianOperator,
    periods: u32,
) -> Result<UnitaryPropagator> {
    propagator_floquet(ha, hb, H1_HALF_PERIOD, periods)
}

pub fn propagator_floquet(
    ha: &HermitianOperator,
    hb: &HermitianOperator,
    half_period: f64,
    periods: u32,
) -> Result<UnitaryPropagator> {
    if ha.dim() != hb.dim() {
        return Err(QelmError::DimensionMismatch {
            expected: ha.dim(),
            got: hb.dim(),
        });
    }
    let recipe = Recipe::FloquetPeriodPower {
        periods,
        half_period,
    };
    let total_time = 2.0 * half_period * f64::from(periods);
    if periods == 0 {
        return Ok(UnitaryPropagator {
            split: SplitMatrix::identity(ha.dim()),
            total_time,
            recipe,
        });
    }
    let ua = exponentiate(ha, half_period)?;
    let ub = exponentiate(hb, half_period)?;
    let period = ub.mul(&ua);
    Ok(UnitaryPropagator {
        split: matrix_power(period, periods),
        total_time,
        recipe,
    })
}

/// Binary exponentiation.
fn matrix_power(base: SplitMatrix, mut exp: u32) -> SplitMatrix {
    let mut acc: Option<SplitMatrix> = None;
    let mut sq = base;
    loop {
        if exp & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => a.mul(&sq),
            });
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        sq = sq.mul(&sq);
    }
    acc.unwrap_or_else(|| SplitMatrix::identity(sq.nrows()))
}

pub fn evolve(u: &UnitaryPropagator, psi: &StateVector) -> Result<StateVector> {
    u.evolve(psi)
}
