//! Quantum extreme learning machine (QELM) workbench.
//!
//! The pipeline is: images → feature reduction (PCA or autoencoder) →
//! qubit-state encoding → fixed reservoir evolution under a spin
//! Hamiltonian → computational-basis probabilities → softmax readout.
//! Only the readout is trained.
//!
//! Everything is simulated with dense state vectors and exact
//! eigendecomposition propagators.

pub mod classifier;
pub mod data;
pub mod encoding;
mod error;
pub mod experiment;
pub mod linalg;
pub mod measurement;
pub mod optim;
pub mod reduction;
pub mod reservoir;

pub use error::{QelmError, Result};

/// Number of pixels in a 28x28 MNIST image.
pub const IMAGE_PIXELS: usize = 784;

/// Number of classes in MNIST and Fashion-MNIST.
pub const NUM_CLASSES: usize = 10;
