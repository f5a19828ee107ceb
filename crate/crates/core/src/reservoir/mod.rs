//! Fixed quantum reservoirs: Hamiltonian construction and exact time
//! evolution.

mod hamiltonian;
mod pauli;
mod propagator;

use serde::{Deserialize, Serialize};

pub use hamiltonian::*;
pub use pauli::{dense_from_terms, pauli_string_matrix, total_z, Pauli, PauliTerm};
pub use propagator::{
    evolve, propagator_floquet, propagator_floquet_h1, propagator_static, Recipe,
    UnitaryPropagator,
};

use crate::Result;

/// Everything that determines a reservoir propagator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub kind: HamiltonianKind,
    pub n_qubits: usize,
    /// Coupling-draw seed (H2, H6); ignored by deterministic families.
    pub seed: u64,
    pub boundary: Boundary,
    /// Evolution time of the time-independent families.
    pub evolution_time: f64,
    /// Number of drive periods for H1.
    pub floquet_periods: u32,
}

impl ReservoirSpec {
    pub fn new(kind: HamiltonianKind, n_qubits: usize, seed: u64) -> Self {
        Self {
            kind,
            n_qubits,
            seed,
            boundary: Boundary::Open,
            evolution_time: STATIC_EVOLUTION_TIME,
            floquet_periods: H1_PERIODS,
        }
    }

    /// Build the propagator. Zero time (or zero periods for H1) yields the
    /// identity without touching the Hamiltonian.
    pub fn propagator(&self) -> Result<UnitaryPropagator> {
        if self.kind.is_floquet() {
            if self.floquet_periods == 0 {
                return Ok(UnitaryPropagator::identity(self.n_qubits));
            }
            let (ha, hb) = build_h1_pair(self.n_qubits)?;
            propagator_floquet_h1(&ha, &hb, self.floquet_periods)
        } else {
            if self.evolution_time == 0.0 {
                return Ok(UnitaryPropagator::identity(self.n_qubits));
            }
            let h = build_static(self.kind, self.n_qubits, self.seed, self.boundary)?;
            propagator_static(&h, self.evolution_time)
        }
    }

    /// Operators making up the reservoir (two for H1, one otherwise).
    pub fn operators(&self) -> Result<Vec<HermitianOperator>> {
        if self.kind.is_floquet() {
            let (a, b) = build_h1_pair(self.n_qubits)?;
            Ok(vec![a, b])
        } else {
            Ok(vec![build_static(
                self.kind,
                self.n_qubits,
                self.seed,
                self.boundary,
            )?])
        }
    }
}
