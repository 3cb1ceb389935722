//! Seeded experiment runner for quantum Boltzmann machine training.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]: ensemble
//! members get seeds derived from the run seed and their index, run in
//! parallel, and are aggregated in index order.

// `!(x > 0.0)` style checks are kept because they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;
pub mod stats;

pub use config::{Experiment, ExperimentConfig, FamilyName};
pub use experiments::run_experiment;
pub use output::{Artifact, RunOutput};
pub use stats::EnsembleSummary;
