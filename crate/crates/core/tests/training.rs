mod common;

use qbm_core::datasets::{classical_povm, random_mixed, random_ti_teacher, step_function_state};
use qbm_core::operators::{build_classical_bm, build_complete_pauli_set, build_mean_field, complete_graph};
use qbm_core::training::{
    grad_povm_exact, relative_entropy_to_model, train, GradientKind, OptimizerConfig, StateTrainingSet,
};
use qbm_core::{DensityMatrix, RngStream};

#[test]
fn tomography_of_a_mixed_two_qubit_state() {
    let model = build_complete_pauli_set(2).unwrap();
    let set = random_mixed(2, &mut RngStream::new(401)).unwrap();
    let opt = OptimizerConfig {
        learning_rate: 1.0,
        epochs: 50,
        gradient_kind: GradientKind::RelativeEntropy,
        ..OptimizerConfig::default()
    };
    let trace = train(&model, &vec![0.0; model.len()], (&set).into(), &opt, 0).unwrap();
    let s = relative_entropy_to_model(&model, trace.final_theta().unwrap(), &set).unwrap();
    assert!(s < 1e-8, "relative entropy {s}");
}

#[test]
fn uniform_target_is_fit_at_start() {
    let model = build_complete_pauli_set(2).unwrap();
    let set = StateTrainingSet::new(DensityMatrix::maximally_mixed(4)).unwrap();
    let s = relative_entropy_to_model(&model, &vec![0.0; model.len()], &set).unwrap();
    assert!(s.abs() < 1e-14);
}

#[test]
fn relent_training_increases_the_objective() {
    let teacher = random_ti_teacher(3, true, &mut RngStream::new(402)).unwrap();
    let student = build_mean_field(3).unwrap();
    let opt = OptimizerConfig {
        learning_rate: 1.0,
        epochs: 30,
        gradient_kind: GradientKind::RelativeEntropy,
        ..OptimizerConfig::default()
    };
    let trace = train(&student, &vec![0.0; student.len()], (&teacher.target).into(), &opt, 0).unwrap();
    let objectives = trace.objectives();
    for w in objectives.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{objectives:?}");
    }
}

#[test]
fn classical_bm_fits_classical_data() {
    let q = step_function_state(2, 0.1).unwrap().distribution;
    let set = classical_povm(&q).unwrap();
    let model = build_classical_bm(2, 0, &complete_graph(2)).unwrap();
    let opt = OptimizerConfig {
        learning_rate: 0.5,
        momentum: 0.5,
        epochs: 400,
        gradient_kind: GradientKind::GoldenThompson,
        ..OptimizerConfig::default()
    };
    let trace = train(&model, &vec![0.0; model.len()], (&set).into(), &opt, 0).unwrap();
    let gap = set.max_log_likelihood() - trace.final_objective().unwrap();
    assert!(gap < 0.05, "gap {gap}");
    // a complete classical BM on 2 bits represents every distribution
    assert!(gap < 1e-6, "gap {gap}");
    let g = grad_povm_exact(&model, trace.final_theta().unwrap(), &set, 0.0).unwrap();
    assert!(g.norm() < 1e-5);
}

#[test]
fn sampled_training_is_deterministic_per_seed() {
    let teacher = random_ti_teacher(2, true, &mut RngStream::new(403)).unwrap();
    let student = build_mean_field(2).unwrap();
    let opt = OptimizerConfig {
        learning_rate: 0.5,
        epochs: 10,
        gradient_kind: GradientKind::RelativeEntropySampled { n_samples: 50 },
        ..OptimizerConfig::default()
    };
    let theta0 = vec![0.0; student.len()];
    let a = train(&student, &theta0, (&teacher.target).into(), &opt, 9).unwrap();
    let b = train(&student, &theta0, (&teacher.target).into(), &opt, 9).unwrap();
    let c = train(&student, &theta0, (&teacher.target).into(), &opt, 10).unwrap();
    let csv = |t: &qbm_core::training::TrainingTrace| {
        let mut buf = Vec::new();
        t.write_csv(&mut buf, false).unwrap();
        buf
    };
    assert_eq!(csv(&a), csv(&b));
    assert_ne!(a.final_theta(), c.final_theta());
}
