//! Relative-entropy (state-based) training.

use crate::error::Result;
use crate::linalg::Gibbs;
use crate::operators::HamiltonianModel;

use super::data::{PreparedState, StateTrainingSet};
use super::{regularize, term_expectations, GradientVector};

/// `S(ρ‖e^{-H}/Z) = −S(ρ) + Tr[ρH] + log Z`.
pub(crate) fn divergence(state: &PreparedState, h_expectation: f64, gibbs: &Gibbs) -> f64 {
    -state.entropy + h_expectation + gibbs.log_partition
}

pub(crate) fn objective(
    model: &HamiltonianModel,
    theta: &[f64],
    state: &PreparedState,
    h: &crate::linalg::ComplexMatrix,
    gibbs: &Gibbs,
    lambda: f64,
) -> f64 {
    let s = divergence(state, state.rho.expectation(h), gibbs);
    -s - 0.5 * lambda * model.quantum_norm_sqr(theta)
}

pub(crate) fn gradient(
    model: &HamiltonianModel,
    theta: &[f64],
    state: &PreparedState,
    gibbs: &Gibbs,
    lambda: f64,
) -> GradientVector {
    let diff = gibbs.state.matrix() - state.rho.matrix();
    regularize(model, theta, lambda, term_expectations(model, &diff))
}

/// `−S(ρ‖e^{-H}/Z) − (λ/2)‖h_Q‖²`; maximized when the Gibbs state equals `ρ`.
pub fn objective_relent(model: &HamiltonianModel, theta: &[f64], set: &StateTrainingSet, lambda: f64) -> Result<f64> {
    let state = PreparedState::new(set, model)?;
    let h = model.assemble(theta)?;
    let gibbs = Gibbs::new(&h)?;
    Ok(objective(model, theta, &state, &h, &gibbs, lambda))
}

/// `−Tr[ρ H_j] + Tr[e^{-H} H_j]/Z − λθ_j[j ∈ Q]`.
pub fn grad_relent(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &StateTrainingSet,
    lambda: f64,
) -> Result<GradientVector> {
    let state = PreparedState::new(set, model)?;
    let gibbs = Gibbs::new(&model.assemble(theta)?)?;
    Ok(gradient(model, theta, &state, &gibbs, lambda))
}

/// `S(ρ‖e^{-H(θ)}/Z)` with the data padded to the model's hidden units.
pub fn relative_entropy_to_model(model: &HamiltonianModel, theta: &[f64], set: &StateTrainingSet) -> Result<f64> {
    let state = PreparedState::new(set, model)?;
    let h = model.assemble(theta)?;
    let gibbs = Gibbs::new(&h)?;
    Ok(divergence(&state, state.rho.expectation(&h), &gibbs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gibbs_state, relative_entropy, DensityMatrix};
    use crate::operators::{build_complete_pauli_set, build_transverse_ising_complete};

    #[test]
    fn zero_at_the_model_state() {
        let model = build_transverse_ising_complete(2).unwrap();
        let theta = [0.4, -0.3, 0.8, 0.1, -0.6];
        let (rho, _) = gibbs_state(&model.assemble(&theta).unwrap()).unwrap();
        let set = StateTrainingSet::new(rho).unwrap();
        assert!(objective_relent(&model, &theta, &set, 0.0).unwrap().abs() < 1e-12);
        let g = grad_relent(&model, &theta, &set, 0.0).unwrap();
        assert!(g.norm() < 1e-10);
    }

    #[test]
    fn uniform_model_closed_form() {
        let model = build_complete_pauli_set(2).unwrap();
        let rho = DensityMatrix::new(crate::linalg::diagonal(&[0.4, 0.3, 0.2, 0.1])).unwrap();
        let entropy = rho.von_neumann_entropy().unwrap();
        let set = StateTrainingSet::new(rho.clone()).unwrap();
        let got = objective_relent(&model, &[0.0; 15], &set, 0.0).unwrap();
        assert!((got + (2.0 * 2f64.ln() - entropy)).abs() < 1e-12);
        let direct = relative_entropy(&rho, &DensityMatrix::maximally_mixed(4)).unwrap();
        assert!((got + direct).abs() < 1e-12);
    }

    #[test]
    fn hidden_units_pad_with_maximally_mixed_state() {
        let model = crate::operators::build_fermionic_model(1, 1).unwrap();
        let rho = DensityMatrix::new(crate::linalg::diagonal(&[0.7, 0.3])).unwrap();
        let set = StateTrainingSet::new(rho.clone()).unwrap();
        let theta = vec![0.0; model.len()];
        let padded = rho.tensor(&DensityMatrix::maximally_mixed(2));
        let direct = relative_entropy(&padded, &DensityMatrix::maximally_mixed(4)).unwrap();
        let got = relative_entropy_to_model(&model, &theta, &set).unwrap();
        assert!((got - direct).abs() < 1e-12);
    }
}
