//! Dense-matrix quantum Boltzmann machines.
//!
//! Hamiltonians are `H(θ) = Σ_j θ_j H_j` over `n_visible + n_hidden` qubits,
//! with qubit 0 the most significant bit of a basis index and visible qubits
//! first. Gibbs states are taken at unit inverse temperature.

// `!(x > 0.0)` style checks are kept because they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datasets;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod rng;
pub mod training;

pub use error::{QbmError, Result};
pub use linalg::{ComplexMatrix, ComplexVector, DensityMatrix, Gibbs};
pub use operators::{HamiltonianModel, ModelDescriptor, ModelFamily};
pub use rng::RngStream;
