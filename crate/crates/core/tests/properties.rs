mod common;

use common::{gaussian_theta, state};
use proptest::prelude::*;
use qbm_core::datasets::random_hermitian;
use qbm_core::linalg::{
    divided_difference_exp_neg, frechet_exp_neg, gibbs_state, hermitian_eigendecompose, identity, trace, ComplexMatrix,
};
use qbm_core::operators::{build_mean_field, build_transverse_ising_complete};
use qbm_core::training::objective_relent;
use qbm_core::RngStream;

fn expm_neg(h: &ComplexMatrix) -> ComplexMatrix {
    hermitian_eigendecompose(h).unwrap().map(|x| (-x).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gibbs_state_is_a_state(seed in any::<u64>(), n in 1usize..=3, scale in 0.01f64..20.0) {
        let h = random_hermitian(1 << n, scale, &mut RngStream::new(seed));
        let (rho, log_z) = gibbs_state(&h).unwrap();
        prop_assert!((trace(rho.matrix()).re - 1.0).abs() < 1e-12);
        prop_assert!(hermitian_eigendecompose(rho.matrix()).unwrap().min_eigenvalue() > -1e-14);
        prop_assert!(log_z.is_finite());
    }

    #[test]
    fn shifting_h_shifts_log_partition(seed in any::<u64>(), shift in -50.0f64..50.0) {
        let h = random_hermitian(4, 1.0, &mut RngStream::new(seed));
        let shifted = &h + identity(4).scale(shift);
        let (_, a) = gibbs_state(&h).unwrap();
        let (_, b) = gibbs_state(&shifted).unwrap();
        prop_assert!((a - shift - b).abs() < 1e-9);
    }

    #[test]
    fn divided_difference_is_symmetric_and_negative(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let x = divided_difference_exp_neg(a, b);
        prop_assert!(x < 0.0);
        prop_assert!((x - divided_difference_exp_neg(b, a)).abs() <= 1e-12 * x.abs());
    }

    #[test]
    fn frechet_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let h = random_hermitian(4, 1.0, &mut rng);
        let e = random_hermitian(4, 1.0, &mut rng);
        let step = 1e-5;
        let fd = (expm_neg(&(&h + e.scale(step))) - expm_neg(&(&h - e.scale(step)))).unscale(2.0 * step);
        let got = frechet_exp_neg(&h, &e).unwrap();
        prop_assert!((got - &fd).norm() < 1e-7 * fd.norm().max(1.0));
    }

    #[test]
    fn relent_objective_is_concave_and_nonpositive(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let m = build_transverse_ising_complete(2).unwrap();
        let set = state(2, &mut rng);
        let a = gaussian_theta(m.len(), 1.5, &mut rng);
        let b = gaussian_theta(m.len(), 1.5, &mut rng);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let fa = objective_relent(&m, &a, &set, 0.3).unwrap();
        let fb = objective_relent(&m, &b, &set, 0.3).unwrap();
        let fm = objective_relent(&m, &mid, &set, 0.3).unwrap();
        prop_assert!(fm >= 0.5 * (fa + fb) - 1e-9);
        prop_assert!(objective_relent(&m, &a, &set, 0.0).unwrap() <= 1e-12);
    }

    #[test]
    fn assembly_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let mut rng = RngStream::new(seed);
        let m = build_mean_field(3).unwrap();
        let a = gaussian_theta(m.len(), 1.0, &mut rng);
        let b = gaussian_theta(m.len(), 1.0, &mut rng);
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
        let lhs = m.assemble(&combo).unwrap();
        let rhs = m.assemble(&a).unwrap().scale(alpha) + m.assemble(&b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}
