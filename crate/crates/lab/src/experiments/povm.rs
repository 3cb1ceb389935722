//! Generative fit of the step-function target: Fermionic QBM against the
//! classical Boltzmann machine on the same units.

use anyhow::Result;
use qbm_core::datasets::step_function_state;
use qbm_core::training::{train, TrainingTrace};
use qbm_core::RngStream;
use serde_json::json;

use super::{gaussian_vector, instance_seed, par_map};
use crate::config::{ExperimentConfig, FamilyName};
use crate::output::{Artifact, RunOutput};
use crate::stats::EnsembleSummary;

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub n_visible: usize,
    pub n_hidden: usize,
    /// `Δ𝒪 = 𝒪_max − 𝒪` per epoch for the configured (quantum) family.
    pub quantum: EnsembleSummary,
    /// The same for the classical Boltzmann machine.
    pub classical: EnsembleSummary,
    pub quantum_final_objective: Vec<f64>,
    pub classical_final_objective: Vec<f64>,
    pub quantum_trace: TrainingTrace,
    pub classical_trace: TrainingTrace,
}

#[derive(Debug, Clone)]
pub struct PovmResult {
    pub max_objective: Vec<f64>,
    pub points: Vec<GridPoint>,
}

struct Run {
    gap: Vec<f64>,
    final_objective: f64,
    trace: TrainingTrace,
}

fn train_one(config: &ExperimentConfig, family: FamilyName, nv: usize, nh: usize, seed: u64) -> Result<Run> {
    let target = step_function_state(nv, config.noise_p)?;
    let model = family.build(nv, nh)?;
    let theta0 = gaussian_vector(model.len(), config.init_scale, &mut RngStream::new(seed));
    let trace = train(&model, &theta0, (&target.povm).into(), &config.optimizer(), seed)?;
    let max = target.povm.max_log_likelihood();
    // the monitored objective carries the L2 penalty; Δ𝒪 is on the likelihood
    let gap: Vec<f64> = trace
        .records
        .iter()
        .map(|r| max - (r.objective + 0.5 * config.lambda * model.quantum_norm_sqr(&r.theta)))
        .collect();
    let final_objective = max - gap.last().copied().unwrap_or(f64::NAN);
    Ok(Run {
        gap,
        final_objective,
        trace,
    })
}

pub fn run_povm_experiment(config: &ExperimentConfig) -> Result<PovmResult> {
    let grid: Vec<(usize, usize)> = config
        .n_visible_grid
        .iter()
        .flat_map(|&nv| config.n_hidden_grid.iter().map(move |&nh| (nv, nh)))
        .collect();
    let k = config.ensemble;
    // every (grid point, instance, model) triple is an independent task
    let runs = par_map(grid.len() * k * 2, |task| {
        let (point, rest) = (task / (2 * k), task % (2 * k));
        let (instance, classical) = (rest / 2, rest % 2 == 1);
        let (nv, nh) = grid[point];
        let seed = instance_seed(config.seed, point as u64, instance);
        let family = if classical {
            FamilyName::ClassicalBm
        } else {
            config.family
        };
        train_one(config, family, nv, nh, seed)
    })?;
    let mut runs = runs.into_iter();
    let mut points = Vec::with_capacity(grid.len());
    for &(n_visible, n_hidden) in &grid {
        let mut quantum = Vec::with_capacity(k);
        let mut classical = Vec::with_capacity(k);
        for _ in 0..k {
            quantum.push(runs.next().expect("task count"));
            classical.push(runs.next().expect("task count"));
        }
        let summarize = |runs: &[Run]| {
            let series: Vec<Vec<f64>> = runs.iter().map(|r| r.gap.clone()).collect();
            let aborted = runs.iter().filter(|r| r.trace.is_aborted()).count();
            EnsembleSummary::from_series("delta_objective", &series, aborted)
        };
        points.push(GridPoint {
            n_visible,
            n_hidden,
            quantum: summarize(&quantum),
            classical: summarize(&classical),
            quantum_final_objective: quantum.iter().map(|r| r.final_objective).collect(),
            classical_final_objective: classical.iter().map(|r| r.final_objective).collect(),
            quantum_trace: quantum.swap_remove(0).trace,
            classical_trace: classical.swap_remove(0).trace,
        });
    }
    let max_objective = config
        .n_visible_grid
        .iter()
        .map(|&nv| Ok(step_function_state(nv, config.noise_p)?.povm.max_log_likelihood()))
        .collect::<Result<_>>()?;
    Ok(PovmResult { max_objective, points })
}

impl PovmResult {
    /// Whether the quantum model's final objective is at least the classical
    /// one for every instance at every grid point.
    pub fn quantum_dominates(&self) -> bool {
        self.points.iter().all(|p| {
            p.quantum_final_objective
                .iter()
                .zip(&p.classical_final_objective)
                .all(|(q, c)| q >= c)
        })
    }

    pub fn output(&self, config: &ExperimentConfig) -> Result<RunOutput> {
        let mut artifacts = Vec::new();
        let mut rows = Vec::new();
        for p in &self.points {
            let stem = format!("povm_nv{}_nh{}", p.n_visible, p.n_hidden);
            artifacts.push(Artifact::new(format!("{stem}_quantum.csv"), p.quantum.to_csv()));
            artifacts.push(Artifact::new(format!("{stem}_classical.csv"), p.classical.to_csv()));
            artifacts.push(Artifact::trace(
                format!("{stem}_quantum_trace.csv"),
                &p.quantum_trace,
                config.timing,
            )?);
            artifacts.push(Artifact::trace(
                format!("{stem}_classical_trace.csv"),
                &p.classical_trace,
                config.timing,
            )?);
            rows.push(json!({
                "n_visible": p.n_visible,
                "n_hidden": p.n_hidden,
                "quantum": p.quantum.final_percentiles(),
                "classical": p.classical.final_percentiles(),
                "quantum_final_objective": p.quantum_final_objective,
                "classical_final_objective": p.classical_final_objective,
                "quantum_aborted": p.quantum.aborted,
                "classical_aborted": p.classical.aborted,
            }));
        }
        Ok(RunOutput {
            summary: json!({
                "metric": "delta_objective",
                "max_objective": self.max_objective,
                "grid": rows,
                "quantum_dominates": self.quantum_dominates(),
            }),
            artifacts,
            passed: true,
        })
    }
}
