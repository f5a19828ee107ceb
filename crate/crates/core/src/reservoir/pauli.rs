//! Pauli strings on an `N`-qubit register.
//!
//! A Pauli string has exactly one non-zero entry per row, so terms are
//! accumulated straight into the dense matrix without forming Kronecker
//! products.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, C64};
use crate::{QelmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

/// Real-coefficient product of single-site Paulis; unassigned sites carry
/// the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coeff: f64, ops: impl Into<Vec<(usize, Pauli)>>) -> Self {
        Self {
            coeff,
            ops: ops.into(),
        }
    }

    pub fn check(&self, n_qubits: usize) -> Result<()> {
        for &(q, _) in &self.ops {
            if q >= n_qubits {
                return Err(QelmError::InvalidArgument(format!(
                    "Pauli site {q} out of range for {n_qubits} qubits"
                )));
            }
        }
        let mut sites: Vec<_> = self.ops.iter().map(|&(q, _)| q).collect();
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(QelmError::InvalidArgument(
                "Pauli string assigns a site twice".into(),
            ));
        }
        Ok(())
    }

    /// Add `coeff · P` into `m`. Qubit 0 is the most significant bit.
    pub fn accumulate(&self, n_qubits: usize, m: &mut CMatrix) {
        let mut flip = 0usize;
        for &(q, p) in &self.ops {
            if p != Pauli::Z {
                flip |= 1 << (n_qubits - 1 - q);
            }
        }
        for row in 0..(1usize << n_qubits) {
            let col = row ^ flip;
            let mut v = C64::new(self.coeff, 0.0);
            for &(q, p) in &self.ops {
                let bit = (row >> (n_qubits - 1 - q)) & 1;
                match p {
                    Pauli::X => {}
                    // ⟨r|Z|r⟩ = (-1)^r
                    Pauli::Z => {
                        if bit == 1 {
                            v = -v;
                        }
                    }
                    // ⟨0|Y|1⟩ = -i, ⟨1|Y|0⟩ = i
                    Pauli::Y => {
                        v *= if bit == 1 {
                            C64::new(0.0, 1.0)
                        } else {
                            C64::new(0.0, -1.0)
                        };
                    }
                }
            }
            m[(row, col)] += v;
        }
    }
}

/// Dense matrix of `Σ terms` on `n_qubits` qubits.
pub fn dense_from_terms(n_qubits: usize, terms: &[PauliTerm]) -> Result<CMatrix> {
    let dim = 1usize << n_qubits;
    let mut m = CMatrix::zeros(dim, dim);
    for t in terms {
        t.check(n_qubits)?;
        t.accumulate(n_qubits, &mut m);
    }
    Ok(m)
}

/// Dense matrix of a single unit-coefficient Pauli string.
pub fn pauli_string_matrix(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<CMatrix> {
    dense_from_terms(n_qubits, &[PauliTerm::new(1.0, ops.to_vec())])
}

/// `Σ_i Z_i`.
pub fn total_z(n_qubits: usize) -> CMatrix {
    let terms: Vec<_> = (0..n_qubits)
        .map(|i| PauliTerm::new(1.0, vec![(i, Pauli::Z)]))
        .collect();
    dense_from_terms(n_qubits, &terms).expect("sites in range")
}
