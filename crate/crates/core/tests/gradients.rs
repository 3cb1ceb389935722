mod common;

use common::{families, gaussian_theta, model, povm, state};
use qbm_core::datasets::classical_povm;
use qbm_core::linalg::{spectral_norm, DEFAULT_LOG_CLIP};
use qbm_core::operators::{build_fermionic_model, build_transverse_ising_complete};
use qbm_core::training::{
    central_difference, grad_povm_commutator, grad_povm_exact, grad_povm_gt, grad_relent, objective_povm_exact,
    objective_povm_gt, objective_relent, relative_error,
};
use qbm_core::RngStream;

const STEP: f64 = 1e-5;

#[test]
fn exact_povm_gradient_matches_finite_differences() {
    let mut rng = RngStream::new(101);
    for n in 1..=3 {
        for family in families(n) {
            let m = model(&family, n);
            let set = povm(n, &mut rng);
            let theta = gaussian_theta(m.len(), 0.5, &mut rng);
            let g = grad_povm_exact(&m, &theta, &set, 0.3).unwrap();
            let fd = central_difference(|t| objective_povm_exact(&m, t, &set, 0.3), &theta, STEP).unwrap();
            let err = relative_error(g.values(), &fd);
            assert!(err < 1e-6, "{} n={n}: {err:e}", family.name());
        }
    }
}

#[test]
fn gt_gradient_matches_finite_differences_of_the_bound() {
    let mut rng = RngStream::new(102);
    for n in 1..=3 {
        for family in families(n) {
            let m = model(&family, n);
            let set = povm(n, &mut rng);
            let theta = gaussian_theta(m.len(), 0.5, &mut rng);
            let g = grad_povm_gt(&m, &theta, &set, 0.2, DEFAULT_LOG_CLIP).unwrap();
            let fd =
                central_difference(|t| objective_povm_gt(&m, t, &set, 0.2, DEFAULT_LOG_CLIP), &theta, STEP).unwrap();
            let err = relative_error(g.values(), &fd);
            assert!(err < 1e-5, "{} n={n}: {err:e}", family.name());
        }
    }
}

#[test]
fn relent_gradient_matches_finite_differences() {
    let mut rng = RngStream::new(103);
    for n in 1..=3 {
        for family in families(n) {
            let m = model(&family, n);
            let set = state(n, &mut rng);
            let theta = gaussian_theta(m.len(), 0.5, &mut rng);
            let g = grad_relent(&m, &theta, &set, 0.4).unwrap();
            let fd = central_difference(|t| objective_relent(&m, t, &set, 0.4), &theta, STEP).unwrap();
            let err = relative_error(g.values(), &fd);
            assert!(err < 1e-6, "{} n={n}: {err:e}", family.name());
        }
    }
}

#[test]
fn hidden_unit_gradients_match_finite_differences() {
    let mut rng = RngStream::new(104);
    let m = build_fermionic_model(2, 1).unwrap();
    let set = povm(2, &mut rng);
    let theta = gaussian_theta(m.len(), 0.4, &mut rng);
    let g = grad_povm_exact(&m, &theta, &set, 0.0).unwrap();
    let fd = central_difference(|t| objective_povm_exact(&m, t, &set, 0.0), &theta, STEP).unwrap();
    assert!(relative_error(g.values(), &fd) < 1e-6);
    let s = state(2, &mut rng);
    let g = grad_relent(&m, &theta, &s, 0.0).unwrap();
    let fd = central_difference(|t| objective_relent(&m, t, &s, 0.0), &theta, STEP).unwrap();
    assert!(relative_error(g.values(), &fd) < 1e-6);
}

fn unit_norm_instance(
    seed: u64,
) -> (
    qbm_core::HamiltonianModel,
    Vec<f64>,
    qbm_core::training::PovmTrainingSet,
) {
    let mut rng = RngStream::new(seed);
    let m = build_transverse_ising_complete(3).unwrap();
    let mut theta = gaussian_theta(m.len(), 1.0, &mut rng);
    let norm = spectral_norm(&m.assemble(&theta).unwrap()).unwrap();
    theta.iter_mut().for_each(|x| *x /= norm);
    (m, theta, povm(3, &mut rng))
}

#[test]
fn commutator_series_converges_to_exact_gradient() {
    for seed in 0..5 {
        let (m, theta, set) = unit_norm_instance(seed);
        let exact = grad_povm_exact(&m, &theta, &set, 0.0).unwrap();
        let errors: Vec<f64> = (1..=8)
            .map(|k| {
                let g = grad_povm_commutator(&m, &theta, &set, 0.0, k).unwrap();
                relative_error(g.values(), exact.values())
            })
            .collect();
        // the error shrinks over every pair of orders; a single added odd
        // term can overshoot, so consecutive orders are not compared
        for w in errors.windows(3) {
            assert!(w[2] < w[0], "seed {seed}: {errors:?}");
        }
        let high = grad_povm_commutator(&m, &theta, &set, 0.0, 12).unwrap();
        let err = relative_error(high.values(), exact.values());
        assert!(err < 1e-6, "seed {seed}: order 12 error {err:e}");
    }
}

#[test]
fn commutator_order_one_is_exact_when_everything_commutes() {
    let mut rng = RngStream::new(105);
    let m = model(&families(2)[0], 2);
    let theta = gaussian_theta(m.len(), 0.7, &mut rng);
    let set = classical_povm(&[0.1, 0.2, 0.3, 0.4]).unwrap();
    let exact = grad_povm_exact(&m, &theta, &set, 0.0).unwrap();
    let first = grad_povm_commutator(&m, &theta, &set, 0.0, 1).unwrap();
    assert!(relative_error(first.values(), exact.values()) < 1e-12);
}
