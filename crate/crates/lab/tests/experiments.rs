use qbm_lab::experiments::{
    gradcheck, run_commutator_compare, run_hamlearn, run_povm_experiment, run_tomography_ensemble, run_variance_sweep,
};
use qbm_lab::{EnsembleSummary, Experiment, ExperimentConfig, FamilyName};

fn defaults(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig::resolve(experiment, None, &[]).unwrap()
}

fn assert_ordered(s: &EnsembleSummary) {
    for i in 0..s.epochs.len() {
        let row = [s.p2_5[i], s.p5[i], s.median[i], s.p95[i], s.p97_5[i]];
        assert!(row.windows(2).all(|w| w[0] <= w[1]), "{} epoch {i}: {row:?}", s.metric);
    }
}

#[test]
fn classical_schedules_a_and_b_coincide() {
    let config = ExperimentConfig {
        family: FamilyName::ClassicalBm,
        n_visible: 3,
        targets: vec!["distribution".into()],
        epochs: 20,
        ensemble: 2,
        ..defaults(Experiment::CommutatorCompare)
    };
    let result = run_commutator_compare(&config).unwrap();
    for inst in &result.instances {
        let (a, b) = (inst.gt_only.objectives(), inst.switched.objectives());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
    // every order is exact for commuting terms
    assert!(
        result.order_errors.iter().all(|&e| e < 1e-10),
        "{:?}",
        result.order_errors
    );
}

#[test]
fn commutator_compare_is_well_formed() {
    let config = ExperimentConfig {
        epochs: 10,
        ensemble: 3,
        ..defaults(Experiment::CommutatorCompare)
    };
    let result = run_commutator_compare(&config).unwrap();
    for s in [&result.schedule_a, &result.schedule_b, &result.schedule_c] {
        assert_eq!(s.epochs.len(), 11);
        assert_ordered(s);
    }
    // the grid contains the default (η, μ), so C is at least as good as A per instance
    for inst in &result.instances {
        assert!(inst.choice.final_objective >= inst.gt_only.final_objective().unwrap() - 1e-12);
    }
    let tail = &result.order_errors[result.order_errors.len() - 2..];
    assert!(
        tail[1] < result.order_errors[0] && tail[1] < 1e-3,
        "{:?}",
        result.order_errors
    );
}

#[test]
fn quantum_beats_classical_on_small_grid() {
    let config = ExperimentConfig {
        n_visible_grid: vec![3],
        n_hidden_grid: vec![0, 1],
        epochs: 60,
        ..defaults(Experiment::PovmTrain)
    };
    let result = run_povm_experiment(&config).unwrap();
    assert_eq!(result.points.len(), 2);
    assert!(result.quantum_dominates());
    for p in &result.points {
        // Δ𝒪 is a gap to the maximum, so it is non-negative
        assert!(p.quantum.final_median() >= -1e-12);
        assert!(p.classical.final_median() >= -1e-12);
        assert_ordered(&p.quantum);
    }
}

#[test]
fn tomography_mixed_targets_reach_precision_floor() {
    let config = ExperimentConfig {
        ensemble: 10,
        epochs: 50,
        ..defaults(Experiment::Tomography)
    };
    let result = run_tomography_ensemble(&config).unwrap();
    let mixed = result.ensemble("mixed").unwrap();
    assert!(mixed.relative_entropy.median_at(50) < 1e-8);
    assert_ordered(&mixed.relative_entropy);
    let pure = result.ensemble("pure").unwrap();
    assert!(pure.relative_entropy.median_at(35) > mixed.relative_entropy.median_at(35));
}

#[test]
fn hamlearn_recovers_normalized_teachers() {
    let config = ExperimentConfig {
        ensemble: 5,
        ..defaults(Experiment::Hamlearn)
    };
    let result = run_hamlearn(&config).unwrap();
    let unit = result.ensemble("normalized").unwrap();
    assert!(unit.delta_h.final_median() < 1e-3 * unit.delta_h.median_at(0));
    assert!(unit.relative_entropy.final_median() < 1e-10);
}

#[test]
fn variance_sweep_matches_prediction() {
    let config = ExperimentConfig {
        n_samples: vec![32, 128, 512],
        repetitions: 400,
        ..defaults(Experiment::VarianceSweep)
    };
    let report = run_variance_sweep(&config).unwrap();
    assert_eq!(report.large.n_terms, 2 * report.small.n_terms);
    for m in [&report.small, &report.large] {
        for (mse, predicted) in m.mse.iter().zip(&m.predicted) {
            assert!((mse / predicted - 1.0).abs() < 0.25, "{mse} vs {predicted}");
        }
        assert!((m.slope + 1.0).abs() < 0.15);
    }
}

#[test]
fn gradcheck_passes_on_small_ensemble() {
    let config = ExperimentConfig {
        ensemble: 4,
        ..defaults(Experiment::Gradcheck)
    };
    let report = gradcheck(&config).unwrap();
    assert!(report.passed(), "{}", report.render());
    assert_eq!(report.rows.len(), 4 * FamilyName::ALL.len());
    assert_eq!(report.order_sweep.len(), config.commutator_order);
}
