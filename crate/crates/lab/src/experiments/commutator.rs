//! Golden-Thompson training against a switch to commutator-series gradients.
//!
//! Schedule A trains with Golden-Thompson gradients throughout, B switches to
//! the commutator series halfway, and C is Golden-Thompson with the best
//! `(η, μ)` of a fixed grid. All curves are exact log-likelihoods.

use anyhow::Result;
use qbm_core::datasets::{classical_povm, step_function_state};
use qbm_core::linalg::spectral_norm;
use qbm_core::operators::HamiltonianModel;
use qbm_core::training::{
    grad_povm_commutator, grad_povm_exact, relative_error, train, train_phases, GradientKind, OptimizerConfig,
    PovmTrainingSet, TrainingTrace,
};
use qbm_core::RngStream;
use serde::Serialize;
use serde_json::json;

use super::{gaussian_vector, instance_seed, par_map};
use crate::config::ExperimentConfig;
use crate::output::{Artifact, RunOutput};
use crate::stats::EnsembleSummary;

pub const GRID_LEARNING_RATES: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];
pub const GRID_MOMENTA: [f64; 3] = [0.0, 0.5, 0.9];
/// Orders swept when measuring truncation error.
pub const SWEEP_ORDERS: std::ops::RangeInclusive<usize> = 1..=8;

#[derive(Debug, Clone, Serialize)]
pub struct GridChoice {
    pub learning_rate: f64,
    pub momentum: f64,
    pub final_objective: f64,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub gt_only: TrainingTrace,
    pub switched: TrainingTrace,
    pub tuned: TrainingTrace,
    pub choice: GridChoice,
}

#[derive(Debug, Clone)]
pub struct CommutatorResult {
    pub schedule_a: EnsembleSummary,
    pub schedule_b: EnsembleSummary,
    pub schedule_c: EnsembleSummary,
    pub instances: Vec<Instance>,
    /// Relative error of the order-k gradient against the exact one, for
    /// k in [`SWEEP_ORDERS`], at a random point rescaled to ‖H‖₂ = 1.
    pub order_errors: Vec<f64>,
}

fn final_objective(trace: &TrainingTrace) -> f64 {
    trace.final_objective().unwrap_or(f64::NEG_INFINITY)
}

fn run_instance(
    model: &HamiltonianModel,
    set: &PovmTrainingSet,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Instance> {
    let theta0 = gaussian_vector(model.len(), config.init_scale, &mut RngStream::new(seed));
    let gt = OptimizerConfig {
        gradient_kind: GradientKind::GoldenThompson,
        ..config.optimizer()
    };
    let gt_only = train(model, &theta0, set.into(), &gt, seed)?;

    // GT for the first half, then the series; momentum carries across
    let first = (config.epochs / 2).max(1);
    let switched = if config.epochs > first {
        let commutator = OptimizerConfig {
            epochs: config.epochs - first,
            gradient_kind: GradientKind::Commutator {
                order: config.commutator_order,
            },
            ..gt
        };
        train_phases(
            model,
            &theta0,
            set.into(),
            &[OptimizerConfig { epochs: first, ..gt }, commutator],
            seed,
        )?
    } else {
        gt_only.clone()
    };

    let mut best: Option<(GridChoice, TrainingTrace)> = None;
    for &learning_rate in &GRID_LEARNING_RATES {
        for &momentum in &GRID_MOMENTA {
            let opt = OptimizerConfig {
                learning_rate,
                momentum,
                ..gt
            };
            let trace = train(model, &theta0, set.into(), &opt, seed)?;
            let value = final_objective(&trace);
            if best.as_ref().is_none_or(|(b, _)| value > b.final_objective) {
                let choice = GridChoice {
                    learning_rate,
                    momentum,
                    final_objective: value,
                };
                best = Some((choice, trace));
            }
        }
    }
    let (choice, tuned) = best.expect("grid is non-empty");
    Ok(Instance {
        gt_only,
        switched,
        tuned,
        choice,
    })
}

/// Order-k truncation errors at a Gaussian point scaled to ‖H‖₂ = 1.
pub fn order_errors(model: &HamiltonianModel, set: &PovmTrainingSet, seed: u64) -> Result<Vec<f64>> {
    let mut theta = gaussian_vector(model.len(), 1.0, &mut RngStream::new(seed));
    let norm = spectral_norm(&model.assemble(&theta)?)?;
    theta.iter_mut().for_each(|x| *x /= norm);
    let exact = grad_povm_exact(model, &theta, set, 0.0)?;
    SWEEP_ORDERS
        .map(|k| {
            let g = grad_povm_commutator(model, &theta, set, 0.0, k)?;
            Ok(relative_error(g.values(), exact.values()))
        })
        .collect()
}

/// The step-function POVM (`povm`) or the computational-basis measurement of
/// the same state (`distribution`), which commutes with classical models.
fn target_set(config: &ExperimentConfig) -> Result<PovmTrainingSet> {
    let target = step_function_state(config.n_visible, config.noise_p)?;
    match config.targets.first().map(String::as_str) {
        Some("distribution") => Ok(classical_povm(&target.distribution)?),
        Some("povm") | None => Ok(target.povm),
        Some(other) => anyhow::bail!("unknown commutator-compare target {other:?}; expected povm or distribution"),
    }
}

pub fn run_commutator_compare(config: &ExperimentConfig) -> Result<CommutatorResult> {
    let model = config.family.build(config.n_visible, config.n_hidden)?;
    let set = target_set(config)?;
    let instances = par_map(config.ensemble, |i| {
        run_instance(&model, &set, config, instance_seed(config.seed, 0, i))
    })?;
    let summarize = |pick: fn(&Instance) -> &TrainingTrace| {
        let series: Vec<Vec<f64>> = instances.iter().map(|i| pick(i).objectives()).collect();
        let aborted = instances.iter().filter(|i| pick(i).is_aborted()).count();
        EnsembleSummary::from_series("exact_objective", &series, aborted)
    };
    let order_errors = order_errors(&model, &set, instance_seed(config.seed, 1, 0))?;
    Ok(CommutatorResult {
        schedule_a: summarize(|i| &i.gt_only),
        schedule_b: summarize(|i| &i.switched),
        schedule_c: summarize(|i| &i.tuned),
        instances,
        order_errors,
    })
}

impl CommutatorResult {
    pub fn output(&self, config: &ExperimentConfig) -> Result<RunOutput> {
        let mut artifacts = vec![
            Artifact::new("schedule_a_gt.csv", self.schedule_a.to_csv()),
            Artifact::new("schedule_b_switch.csv", self.schedule_b.to_csv()),
            Artifact::new("schedule_c_tuned.csv", self.schedule_c.to_csv()),
        ];
        let mut sweep = String::from("order,relative_error\n");
        for (k, e) in SWEEP_ORDERS.zip(&self.order_errors) {
            sweep.push_str(&format!("{k},{e:?}\n"));
        }
        artifacts.push(Artifact::new("order_sweep.csv", sweep.into_bytes()));
        if let Some(first) = self.instances.first() {
            artifacts.push(Artifact::trace("trace_a.csv", &first.gt_only, config.timing)?);
            artifacts.push(Artifact::trace("trace_b.csv", &first.switched, config.timing)?);
            artifacts.push(Artifact::trace("trace_c.csv", &first.tuned, config.timing)?);
        }
        let choices: Vec<&GridChoice> = self.instances.iter().map(|i| &i.choice).collect();
        Ok(RunOutput {
            summary: json!({
                "metric": "exact_objective",
                "schedule_a": self.schedule_a.final_percentiles(),
                "schedule_b": self.schedule_b.final_percentiles(),
                "schedule_c": self.schedule_c.final_percentiles(),
                "aborted": {
                    "a": self.schedule_a.aborted,
                    "b": self.schedule_b.aborted,
                    "c": self.schedule_c.aborted,
                },
                "grid_choices": choices,
                "order_errors": self.order_errors,
            }),
            artifacts,
            passed: true,
        })
    }
}
