//! Average log-likelihood of POVM data and its gradients.
//!
//! Three gradient routes share one objective: the Golden-Thompson lower
//! bound (whose gradient is exact for the bound), the exact Duhamel
//! gradient, and a truncated commutator series that converges to the
//! Duhamel gradient as its order grows.

use crate::error::{QbmError, Result};
use crate::linalg::{add_scaled, commutator, hadamard_divided_differences, ComplexMatrix, EigenSystem, Gibbs};
use crate::operators::HamiltonianModel;

use super::data::{PovmTrainingSet, PreparedPovm};
use super::{regularize, term_expectations, GradientVector, LOG_FLOOR, PROBABILITY_FLOOR};

/// Highest commutator order accepted.
pub const MAX_COMMUTATOR_ORDER: usize = 12;

fn regularizer(model: &HamiltonianModel, theta: &[f64], lambda: f64) -> f64 {
    0.5 * lambda * model.quantum_norm_sqr(theta)
}

fn clamped_log(p: f64) -> f64 {
    if p < PROBABILITY_FLOOR {
        LOG_FLOOR
    } else {
        p.ln()
    }
}

pub(crate) fn exact_objective(
    model: &HamiltonianModel,
    theta: &[f64],
    povm: &PreparedPovm,
    gibbs: &Gibbs,
    lambda: f64,
) -> f64 {
    let likelihood: f64 = povm
        .effects
        .iter()
        .zip(&povm.probabilities)
        .map(|(effect, &p)| p * clamped_log(gibbs.expectation(effect)))
        .sum();
    likelihood - regularizer(model, theta, lambda)
}

/// Clamped Gibbs states `e^{-H_v}/Tr[e^{-H_v}]` with `H_v = H − log Λ_v`.
fn clamped_gibbs(h: &ComplexMatrix, povm: &PreparedPovm) -> Result<Vec<Gibbs>> {
    povm.log_effects
        .iter()
        .map(|log_effect| Gibbs::new(&(h - log_effect)))
        .collect()
}

pub(crate) fn gt_objective(
    model: &HamiltonianModel,
    theta: &[f64],
    povm: &PreparedPovm,
    gibbs: &Gibbs,
    clamped: &[Gibbs],
    lambda: f64,
) -> f64 {
    let bound: f64 = clamped
        .iter()
        .zip(&povm.probabilities)
        .map(|(g, &p)| p * (g.log_partition - gibbs.log_partition).max(LOG_FLOOR))
        .sum();
    bound - regularizer(model, theta, lambda)
}

pub(crate) fn gt_gradient(
    model: &HamiltonianModel,
    theta: &[f64],
    povm: &PreparedPovm,
    gibbs: &Gibbs,
    clamped: &[Gibbs],
    lambda: f64,
) -> GradientVector {
    // Σ_v P_v (ρ − ρ_v) paired with each term
    let mut diff = gibbs.state.matrix().clone();
    for (g, &p) in clamped.iter().zip(&povm.probabilities) {
        add_scaled(&mut diff, -p, g.state.matrix());
    }
    regularize(model, theta, lambda, term_expectations(model, &diff))
}

/// `Σ_v P_v/Tr[Λ_v e^{-H}] · V (Λ̃_v ∘ F) V†`, the matrix whose pairing with
/// `H_j` is `Σ_v P_v ∂_j log Tr[Λ_v e^{-H}] + ⟨H_j⟩`.
fn duhamel_weight(povm: &PreparedPovm, gibbs: &Gibbs) -> ComplexMatrix {
    let eig: &EigenSystem = &gibbs.eigen;
    let shift = eig.min_eigenvalue();
    let dim = eig.dim();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (effect, &p) in povm.effects.iter().zip(&povm.probabilities) {
        let likelihood = gibbs.expectation(effect);
        if likelihood < PROBABILITY_FLOOR {
            continue;
        }
        // Tr[Λ e^{-(H-s)}] = Z_shifted · Tr[Λ ρ]
        let shifted_trace = likelihood * shifted_partition(eig);
        let rotated = eig.to_eigenbasis(effect);
        add_scaled(&mut acc, p / shifted_trace, &rotated);
    }
    hadamard_divided_differences(&mut acc, &eig.eigenvalues, shift);
    eig.from_eigenbasis(&acc)
}

fn shifted_partition(eig: &EigenSystem) -> f64 {
    let shift = eig.min_eigenvalue();
    eig.eigenvalues.iter().map(|&x| (-(x - shift)).exp()).sum()
}

pub(crate) fn exact_gradient(
    model: &HamiltonianModel,
    theta: &[f64],
    povm: &PreparedPovm,
    gibbs: &Gibbs,
    lambda: f64,
) -> GradientVector {
    let mut weight = duhamel_weight(povm, gibbs);
    weight += gibbs.state.matrix();
    regularize(model, theta, lambda, term_expectations(model, &weight))
}

pub(crate) fn commutator_gradient(
    model: &HamiltonianModel,
    theta: &[f64],
    h: &ComplexMatrix,
    povm: &PreparedPovm,
    gibbs: &Gibbs,
    lambda: f64,
    order: usize,
) -> GradientVector {
    // Y = Σ_v P_v Λ_v ρ / Tr[Λ_v ρ]
    let dim = h.nrows();
    let mut y = ComplexMatrix::zeros(dim, dim);
    for (effect, &p) in povm.effects.iter().zip(&povm.probabilities) {
        let likelihood = gibbs.expectation(effect);
        if likelihood < PROBABILITY_FLOOR {
            continue;
        }
        y += (effect * gibbs.state.matrix()).scale(p / likelihood);
    }
    // Tr[Y ad_H^m(B)] = (-1)^m Tr[ad_H^m(Y) B], so the series is summed on Y once
    // and paired with every term afterwards.
    let mut series = ComplexMatrix::zeros(dim, dim);
    let mut nested = y;
    let mut factorial = 1.0;
    for m in 0..order {
        factorial *= (m + 1) as f64;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        add_scaled(&mut series, sign / factorial, &nested);
        if m + 1 < order {
            nested = commutator(h, &nested);
        }
    }
    let mut weight = gibbs.state.matrix().clone();
    weight -= series;
    regularize(model, theta, lambda, term_expectations(model, &weight))
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_COMMUTATOR_ORDER {
        return Err(QbmError::InvalidArgument(format!(
            "commutator order must be in 1..={MAX_COMMUTATOR_ORDER}, got {order}"
        )));
    }
    Ok(())
}

fn prepare(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &PovmTrainingSet,
    clip: Option<f64>,
) -> Result<(ComplexMatrix, PreparedPovm, Gibbs)> {
    let h = model.assemble(theta)?;
    let povm = PreparedPovm::new(set, model, clip)?;
    let gibbs = Gibbs::new(&h)?;
    Ok((h, povm, gibbs))
}

/// `Σ_v P_v log(Tr[Λ_v e^{-H}]/Tr[e^{-H}]) − (λ/2)‖h_Q‖²`.
pub fn objective_povm_exact(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &PovmTrainingSet,
    lambda: f64,
) -> Result<f64> {
    let (_, povm, gibbs) = prepare(model, theta, set, None)?;
    Ok(exact_objective(model, theta, &povm, &gibbs, lambda))
}

/// Golden-Thompson lower bound
/// `Σ_v P_v log(Tr[e^{-H + log Λ_v}]/Tr[e^{-H}]) − (λ/2)‖h_Q‖²`.
pub fn objective_povm_gt(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &PovmTrainingSet,
    lambda: f64,
    clip: f64,
) -> Result<f64> {
    let (h, povm, gibbs) = prepare(model, theta, set, Some(clip))?;
    let clamped = clamped_gibbs(&h, &povm)?;
    Ok(gt_objective(model, theta, &povm, &gibbs, &clamped, lambda))
}

/// Gradient of [`objective_povm_gt`].
pub fn grad_povm_gt(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &PovmTrainingSet,
    lambda: f64,
    clip: f64,
) -> Result<GradientVector> {
    let (h, povm, gibbs) = prepare(model, theta, set, Some(clip))?;
    let clamped = clamped_gibbs(&h, &povm)?;
    Ok(gt_gradient(model, theta, &povm, &gibbs, &clamped, lambda))
}

/// Exact gradient of [`objective_povm_exact`] via the Fréchet derivative of
/// the matrix exponential.
pub fn grad_povm_exact(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &PovmTrainingSet,
    lambda: f64,
) -> Result<GradientVector> {
    let (_, povm, gibbs) = prepare(model, theta, set, None)?;
    Ok(exact_gradient(model, theta, &povm, &gibbs, lambda))
}

/// Gradient of [`objective_povm_exact`] with the Duhamel integral replaced
/// by the first `order` terms of its nested-commutator expansion.
pub fn grad_povm_commutator(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &PovmTrainingSet,
    lambda: f64,
    order: usize,
) -> Result<GradientVector> {
    check_order(order)?;
    let (h, povm, gibbs) = prepare(model, theta, set, None)?;
    Ok(commutator_gradient(model, theta, &h, &povm, &gibbs, lambda, order))
}

pub(crate) fn clamped_states(h: &ComplexMatrix, povm: &PreparedPovm) -> Result<Vec<Gibbs>> {
    clamped_gibbs(h, povm)
}
