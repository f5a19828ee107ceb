//! Browser bindings for the qelm workbench.
//!
//! Every export takes plain arguments and returns a JSON string, so the page
//! needs no bundler. Registers are capped at eight qubits here.

use qelm::encoding::{EncodingKind, EncodingSpec, PhaseRange, RangeMap};
use qelm::linalg::hermitian_spectrum;
use qelm::measurement::measure_exact;
use qelm::reservoir::{Boundary, HamiltonianKind, ReservoirSpec};
use qelm::{QelmError, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_QUBITS: usize = 8;

#[derive(Serialize)]
struct EncodedState {
    n_qubits: usize,
    probabilities: Vec<f64>,
    bloch: Vec<[f64; 3]>,
    purity: Vec<f64>,
}

#[derive(Serialize)]
struct Trajectory {
    times: Vec<f64>,
    /// `probabilities[t][k]`.
    probabilities: Vec<Vec<f64>>,
    /// Bloch z component of each qubit over time.
    magnetization: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Spectrum {
    hamiltonian: String,
    /// One entry per operator (two for the driven family).
    spectra: Vec<Vec<f64>>,
}

fn to_js(e: QelmError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(QelmError::InvalidArgument(format!(
            "the demo supports 1..={MAX_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Features are taken in `[0, 1]` and mapped onto each encoding's angle or
/// population intervals.
fn spec_for(encoding: &str, n_qubits: usize, dim: usize, two_pi: bool) -> Result<EncodingSpec> {
    check_qubits(n_qubits)?;
    let kind: EncodingKind = encoding.parse()?;
    let range = (kind != EncodingKind::Amplitude).then(|| RangeMap {
        lo: vec![0.0; dim],
        hi: vec![1.0; dim],
    });
    Ok(EncodingSpec {
        kind,
        n_qubits,
        phase_range: if two_pi { PhaseRange::TwoPi } else { PhaseRange::Pi },
        range,
    })
}

fn reservoir(hamiltonian: &str, n_qubits: usize, seed: u64, periodic: bool) -> Result<ReservoirSpec> {
    check_qubits(n_qubits)?;
    let kind: HamiltonianKind = hamiltonian.parse()?;
    let mut spec = ReservoirSpec::new(kind, n_qubits, seed);
    spec.boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
    Ok(spec)
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("demo payloads serialize")
}

fn encode_impl(encoding: &str, features: &[f64], n_qubits: usize, two_pi: bool) -> Result<String> {
    let spec = spec_for(encoding, n_qubits, features.len(), two_pi)?;
    let psi = spec.encode(features)?;
    let p = measure_exact(&psi)?;
    Ok(json(&EncodedState {
        n_qubits,
        probabilities: p.into_probabilities(),
        bloch: (0..n_qubits).map(|q| psi.bloch_vector(q)).collect(),
        purity: (0..n_qubits).map(|q| psi.qubit_purity(q)).collect(),
    }))
}

#[allow(clippy::too_many_arguments)]
fn evolve_impl(
    encoding: &str,
    features: &[f64],
    n_qubits: usize,
    hamiltonian: &str,
    seed: u64,
    t_max: f64,
    steps: usize,
    periodic: bool,
) -> Result<String> {
    let psi = spec_for(encoding, n_qubits, features.len(), false)?.encode(features)?;
    let mut spec = reservoir(hamiltonian, n_qubits, seed, periodic)?;
    let steps = steps.clamp(1, 400);
    let mut out = Trajectory {
        times: Vec::with_capacity(steps + 1),
        probabilities: Vec::with_capacity(steps + 1),
        magnetization: vec![Vec::with_capacity(steps + 1); n_qubits],
    };
    for s in 0..=steps {
        let t = if spec.kind.is_floquet() {
            // one drive period is 1.0 time units
            let periods = ((t_max * s as f64 / steps as f64).round()).max(0.0) as u32;
            spec.floquet_periods = periods;
            f64::from(periods)
        } else {
            spec.evolution_time = t_max * s as f64 / steps as f64;
            spec.evolution_time
        };
        let phi = spec.propagator()?.evolve(&psi)?;
        for (q, m) in out.magnetization.iter_mut().enumerate() {
            m.push(phi.bloch_vector(q)[2]);
        }
        out.times.push(t);
        out.probabilities.push(measure_exact(&phi)?.into_probabilities());
    }
    Ok(json(&out))
}

fn spectrum_impl(hamiltonian: &str, n_qubits: usize, seed: u64, periodic: bool) -> Result<String> {
    let spec = reservoir(hamiltonian, n_qubits, seed, periodic)?;
    let spectra = spec
        .operators()?
        .iter()
        .map(|h| hermitian_spectrum(h.matrix()))
        .collect::<Result<Vec<_>>>()?;
    Ok(json(&Spectrum {
        hamiltonian: spec.kind.name().to_string(),
        spectra,
    }))
}

/// Encode `features` (each in `[0, 1]`) and return basis probabilities,
/// per-qubit Bloch vectors and purities.
#[wasm_bindgen]
pub fn encode_state(encoding: &str, features: Vec<f64>, n_qubits: usize, two_pi: bool) -> Result<String, JsValue> {
    encode_impl(encoding, &features, n_qubits, two_pi).map_err(to_js)
}

/// Probabilities and Z magnetization of an encoded state at `steps + 1`
/// evenly spaced times in `[0, t_max]` (drive periods for h1).
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn evolve_trajectory(
    encoding: &str,
    features: Vec<f64>,
    n_qubits: usize,
    hamiltonian: &str,
    seed: u64,
    t_max: f64,
    steps: usize,
    periodic: bool,
) -> Result<String, JsValue> {
    evolve_impl(encoding, &features, n_qubits, hamiltonian, seed, t_max, steps, periodic).map_err(to_js)
}

/// Ascending eigenvalues of the reservoir operator(s).
#[wasm_bindgen]
pub fn hamiltonian_spectrum(hamiltonian: &str, n_qubits: usize, seed: u64, periodic: bool) -> Result<String, JsValue> {
    spectrum_impl(hamiltonian, n_qubits, seed, periodic).map_err(to_js)
}
