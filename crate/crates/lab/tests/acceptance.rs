//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use qbm_core::datasets::{random_diagonal_povm, random_povm};
use qbm_core::linalg::DEFAULT_LOG_CLIP;
use qbm_core::operators::{build_classical_bm, complete_graph};
use qbm_core::training::{objective_povm_exact, objective_povm_gt};
use qbm_core::RngStream;
use qbm_lab::experiments::gradcheck::CheckedKind;
use qbm_lab::experiments::{
    gradcheck, run_commutator_compare, run_hamlearn, run_meanfield, run_povm_experiment, run_tomography_ensemble,
    run_variance_sweep,
};
use qbm_lab::{run_experiment, Experiment, ExperimentConfig, FamilyName};
use rand_distr::{Distribution, StandardNormal, Uniform};

struct Verdict {
    passed: bool,
    detail: String,
}

fn defaults(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig::resolve(experiment, None, &[]).expect("built-in defaults resolve")
}

fn gaussian(len: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..len)
        .map(|_| Distribution::<f64>::sample(&StandardNormal, rng))
        .collect()
}

fn gradient_correctness() -> Result<Verdict> {
    let config = ExperimentConfig {
        ensemble: 100,
        ..defaults(Experiment::Gradcheck)
    };
    let report = gradcheck(&config)?;
    let worst = |kind: CheckedKind| {
        report
            .rows
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.max_relative_error)
            .fold(0.0, f64::max)
    };
    let detail = CheckedKind::ALL
        .iter()
        .map(|&k| format!("{} {:.1e}/{:.0e}", k.name(), worst(k), k.tolerance()))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Verdict {
        passed: report.passed(),
        detail: format!("max rel err over {} families x 100: {detail}", FamilyName::ALL.len()),
    })
}

fn golden_thompson_bound() -> Result<Verdict> {
    let clip = 1e-3;
    let mut rng = RngStream::new(2);
    let mut worst_violation = f64::NEG_INFINITY;
    for i in 0..500 {
        let family = FamilyName::ALL[i % FamilyName::ALL.len()];
        let n = Uniform::new_inclusive(family.min_qubits(), 3)?.sample(&mut rng);
        let model = family.build(n, 0)?;
        let theta = gaussian(model.len(), &mut rng);
        let set = random_povm(n, 3, &mut rng)?;
        let gt = objective_povm_gt(&model, &theta, &set, 0.0, clip)?;
        let exact = objective_povm_exact(&model, &theta, &set.clipped(clip)?, 0.0)?;
        worst_violation = worst_violation.max(gt - exact);
    }
    let model = build_classical_bm(3, 0, &complete_graph(3))?;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..100 {
        let set = random_diagonal_povm(3, 3, 0.05, &mut rng)?;
        let theta = gaussian(model.len(), &mut rng);
        let gt = objective_povm_gt(&model, &theta, &set, 0.0, DEFAULT_LOG_CLIP)?;
        let exact = objective_povm_exact(&model, &theta, &set, 0.0)?;
        worst_gap = worst_gap.max((gt - exact).abs());
    }
    Ok(Verdict {
        passed: worst_violation <= 1e-9 && worst_gap <= 1e-8,
        detail: format!("max(gt - exact) {worst_violation:.2e} <= 1e-9; commuting |gap| {worst_gap:.2e} <= 1e-8"),
    })
}

fn tomography() -> Result<(Verdict, Verdict)> {
    let config = ExperimentConfig {
        ensemble: 100,
        ..defaults(Experiment::Tomography)
    };
    let result = run_tomography_ensemble(&config)?;
    let mixed = &result.ensemble("mixed").expect("mixed targets").relative_entropy;
    let pure = &result.ensemble("pure").expect("pure targets").relative_entropy;
    let at50 = mixed.median_at(50);
    let (pure35, mixed35) = (pure.median_at(35), mixed.median_at(35));
    Ok((
        Verdict {
            passed: at50 <= 1e-8,
            detail: format!("mixed median S at epoch 50 = {at50:.2e} <= 1e-8"),
        },
        Verdict {
            passed: pure35 > mixed35,
            detail: format!("epoch 35 median S: pure {pure35:.2e} > mixed {mixed35:.2e}"),
        },
    ))
}

fn mean_field() -> Result<Verdict> {
    let config = ExperimentConfig {
        ensemble: 50,
        epochs: 100,
        ..defaults(Experiment::Meanfield)
    };
    let result = run_meanfield(&config)?;
    let overlap = result.overlap.final_median();
    let (early, last) = (
        result.relative_entropy.median_at(2),
        result.relative_entropy.median_at(100),
    );
    let spread = (early - last).abs() / last;
    Ok(Verdict {
        passed: (0.5..=0.9).contains(&overlap) && spread <= 0.1,
        detail: format!(
            "median overlap {overlap:.3} in [0.5, 0.9]; median S epoch 2 {early:.3} vs epoch 100 {last:.3} ({:.1}% <= 10%)",
            100.0 * spread
        ),
    })
}

fn hamiltonian_learning() -> Result<Verdict> {
    let mut passed = true;
    let mut parts = Vec::new();
    for n in [2, 3] {
        let config = ExperimentConfig {
            n_visible: n,
            ensemble: 50,
            epochs: 100,
            ..defaults(Experiment::Hamlearn)
        };
        let result = run_hamlearn(&config)?;
        let unit = result
            .ensemble("normalized")
            .expect("normalized teachers")
            .relative_entropy
            .median_at(100);
        let raw = result
            .ensemble("unnormalized")
            .expect("unnormalized teachers")
            .relative_entropy
            .median_at(100);
        passed &= unit < raw;
        parts.push(format!("n={n}: {unit:.1e} < {raw:.1e}"));
    }
    Ok(Verdict {
        passed,
        detail: format!("median S at epoch 100, unit-norm < unit-variance: {}", parts.join(", ")),
    })
}

fn commutator_training() -> Result<Verdict> {
    let config = defaults(Experiment::CommutatorCompare);
    let result = run_commutator_compare(&config)?;
    let (a, b) = (result.schedule_a.final_median(), result.schedule_b.final_median());
    let first6 = &result.order_errors[..6];
    let monotone = first6.windows(2).all(|w| w[1] < w[0]);
    let errors = first6.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(" ");
    Ok(Verdict {
        passed: b >= a && monotone,
        detail: format!("final exact objective B {b:.4} >= A {a:.4}; order 1..6 errors [{errors}] decreasing"),
    })
}

fn quantum_vs_classical() -> Result<Verdict> {
    let config = ExperimentConfig {
        n_visible_grid: vec![3, 4, 5],
        n_hidden_grid: vec![0, 1, 2],
        ..defaults(Experiment::PovmTrain)
    };
    let result = run_povm_experiment(&config)?;
    let margin = result
        .points
        .iter()
        .map(|p| p.classical.final_median() - p.quantum.final_median())
        .fold(f64::INFINITY, f64::min);
    Ok(Verdict {
        passed: result.quantum_dominates(),
        detail: format!(
            "{} grid points, min (quantum - classical) final objective {margin:.3} >= 0",
            result.points.len()
        ),
    })
}

fn variance_theorem() -> Result<Verdict> {
    let report = run_variance_sweep(&defaults(Experiment::VarianceSweep))?;
    let slopes_ok = [report.small.slope, report.large.slope]
        .iter()
        .all(|s| (s + 1.0).abs() <= 0.15);
    let ratios_ok = report.ratio.iter().all(|r| (1.4..=2.6).contains(r));
    let (lo, hi) = report
        .ratio
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    Ok(Verdict {
        passed: slopes_ok && ratios_ok,
        detail: format!(
            "slopes {:.3} (M={}), {:.3} (M={}) within -1 +/- 0.15; MSE ratio in [{lo:.2}, {hi:.2}] within [1.4, 2.6]",
            report.small.slope, report.small.n_terms, report.large.slope, report.large.n_terms
        ),
    })
}

fn determinism() -> Result<Verdict> {
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for experiment in Experiment::ALL {
        let config = ExperimentConfig {
            ensemble: 4,
            epochs: 20,
            repetitions: 20,
            n_visible_grid: vec![3],
            n_hidden_grid: vec![0, 1],
            ..defaults(experiment)
        };
        let first = run_experiment(&config)?.files(&config)?;
        let second = run_experiment(&config)?.files(&config)?;
        compared += first.len();
        if first.len() != second.len() || first.iter().zip(&second).any(|(x, y)| x != y) {
            mismatched.push(experiment.name());
        }
    }
    Ok(Verdict {
        passed: mismatched.is_empty(),
        detail: format!(
            "{compared} files from {} experiments compared byte-for-byte; mismatched: [{}]",
            Experiment::ALL.len(),
            mismatched.join(", ")
        ),
    })
}

fn report(id: u32, name: &str, seconds: f64, verdict: Result<Verdict>) -> bool {
    let (passed, detail) = match verdict {
        Ok(v) => (v.passed, v.detail),
        Err(e) => (false, format!("error: {e:#}")),
    };
    println!(
        "{} {id:>2} {name:<28} {seconds:>6.1}s  {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    passed
}

fn timed<T>(f: impl FnOnce() -> T) -> (f64, T) {
    let start = Instant::now();
    let value = f();
    (start.elapsed().as_secs_f64(), value)
}

fn main() -> ExitCode {
    let mut all = true;
    let (t, v) = timed(gradient_correctness);
    all &= report(1, "gradient correctness", t, v);
    let (t, v) = timed(golden_thompson_bound);
    all &= report(2, "golden-thompson bound", t, v);
    let (t, v) = timed(tomography);
    match v {
        Ok((mixed, pure)) => {
            all &= report(3, "tomography mixed", t, Ok(mixed));
            all &= report(4, "tomography pure vs mixed", t, Ok(pure));
        }
        Err(e) => {
            let msg = format!("{e:#}");
            all &= report(3, "tomography mixed", t, Err(anyhow::anyhow!(msg.clone())));
            all &= report(4, "tomography pure vs mixed", t, Err(anyhow::anyhow!(msg)));
        }
    }
    let (t, v) = timed(mean_field);
    all &= report(5, "mean-field", t, v);
    let (t, v) = timed(hamiltonian_learning);
    all &= report(6, "hamiltonian learning", t, v);
    let (t, v) = timed(commutator_training);
    all &= report(7, "commutator training", t, v);
    let (t, v) = timed(quantum_vs_classical);
    all &= report(8, "quantum vs classical", t, v);
    let (t, v) = timed(variance_theorem);
    all &= report(9, "variance theorem", t, v);
    let (t, v) = timed(determinism);
    all &= report(10, "determinism", t, v);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
