//! Objectives, gradients and the optimizer.
//!
//! Every objective here is maximized. Parameters flagged as quantum carry an
//! L2 penalty `(λ/2)‖h_Q‖²`.

mod data;
mod optimizer;
mod povm;
mod relent;
mod sampling;

pub use data::{PovmElement, PovmTrainingSet, StateTrainingSet};
pub use optimizer::{
    fmt_f64, train, train_phases, EpochRecord, GradientKind, OptimizerConfig, TraceStatus, TrainingData, TrainingTrace,
};
pub use povm::{
    grad_povm_commutator, grad_povm_exact, grad_povm_gt, objective_povm_exact, objective_povm_gt, MAX_COMMUTATOR_ORDER,
};
pub use relent::{grad_relent, objective_relent, relative_entropy_to_model};
pub use sampling::{grad_relent_sampled, sampled_expectation, ExpectationSampler, SampledRelentGradient};

use crate::linalg::{trace_product_hermitian, ComplexMatrix};
use crate::operators::HamiltonianModel;

/// Log-likelihood assigned to an outcome whose model probability underflows.
pub const LOG_FLOOR: f64 = -700.0;
/// Probabilities below this are treated as zero.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Gradient with respect to the model parameters, in term order.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector(Vec<f64>);

impl GradientVector {
    pub fn new(values: Vec<f64>) -> Self {
        GradientVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &GradientVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `Re Tr[m H_j]` for every term.
pub(crate) fn term_expectations(model: &HamiltonianModel, m: &ComplexMatrix) -> Vec<f64> {
    model
        .terms()
        .iter()
        .map(|t| trace_product_hermitian(m, &t.matrix))
        .collect()
}

/// Subtracts `λθ_j` from the quantum components.
pub(crate) fn regularize(model: &HamiltonianModel, theta: &[f64], lambda: f64, mut values: Vec<f64>) -> GradientVector {
    for ((v, t), x) in values.iter_mut().zip(model.terms()).zip(theta) {
        if t.is_quantum {
            *v -= lambda * x;
        }
    }
    GradientVector(values)
}

/// Central finite-difference gradient of `f` at `theta` with step `step`.
pub fn central_difference<F>(f: F, theta: &[f64], step: f64) -> crate::Result<Vec<f64>>
where
    F: Fn(&[f64]) -> crate::Result<f64>,
{
    let mut probe = theta.to_vec();
    let mut out = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        probe[j] = theta[j] + step;
        let up = f(&probe)?;
        probe[j] = theta[j] - step;
        let down = f(&probe)?;
        probe[j] = theta[j];
        out.push((up - down) / (2.0 * step));
    }
    Ok(out)
}

/// `‖a − b‖ / ‖b‖`, or the absolute difference when `b` vanishes.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
