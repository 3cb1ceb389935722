//! Thermal-state tomography of random pure and mixed states.

use anyhow::Result;
use qbm_core::datasets::{haar_random_pure, random_mixed, ComplexArray};
use qbm_core::training::{relative_entropy_to_model, train, StateTrainingSet};
use qbm_core::{Gibbs, RngStream};
use serde::Serialize;
use serde_json::json;

use super::{gaussian_vector, instance_seed, par_map};
use crate::config::ExperimentConfig;
use crate::output::{Artifact, RunOutput};
use crate::stats::EnsembleSummary;

#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    pub instance: usize,
    pub target: ComplexArray,
    pub reconstruction: ComplexArray,
}

#[derive(Debug, Clone)]
pub struct TargetEnsemble {
    pub target: String,
    /// Relative entropy `S(ρ‖σ_θ)` per epoch.
    pub relative_entropy: EnsembleSummary,
    pub reconstructions: Vec<Reconstruction>,
}

#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub ensembles: Vec<TargetEnsemble>,
}

fn target_state(kind: &str, n: usize, seed: u64) -> Result<StateTrainingSet> {
    let mut rng = RngStream::new(seed);
    Ok(match kind {
        "pure" => haar_random_pure(n, &mut rng)?,
        _ => random_mixed(n, &mut rng)?,
    })
}

pub fn run_tomography_ensemble(config: &ExperimentConfig) -> Result<TomographyResult> {
    let n = config.n_visible;
    let model = config.family.build(n, config.n_hidden)?;
    let opt = config.optimizer();
    let mut ensembles = Vec::new();
    for (stream, kind) in config.targets.iter().enumerate() {
        let runs = par_map(config.ensemble, |i| {
            let seed = instance_seed(config.seed, stream as u64, i);
            let set = target_state(kind, n, seed)?;
            let theta0 = gaussian_vector(model.len(), config.init_scale, &mut RngStream::new(seed ^ 1));
            let trace = train(&model, &theta0, (&set).into(), &opt, seed)?;
            let entropies = trace
                .records
                .iter()
                .map(|r| Ok(relative_entropy_to_model(&model, &r.theta, &set)?))
                .collect::<Result<Vec<f64>>>()?;
            let final_theta = trace.final_theta().unwrap_or(&theta0);
            let sigma = Gibbs::new(&model.assemble(final_theta)?)?.state;
            let reconstruction = Reconstruction {
                instance: i,
                target: ComplexArray::from_matrix(set.rho().matrix()),
                reconstruction: ComplexArray::from_matrix(sigma.matrix()),
            };
            Ok((entropies, trace.is_aborted(), reconstruction))
        })?;
        let aborted = runs.iter().filter(|r| r.1).count();
        let series: Vec<Vec<f64>> = runs.iter().map(|r| r.0.clone()).collect();
        ensembles.push(TargetEnsemble {
            target: kind.clone(),
            relative_entropy: EnsembleSummary::from_series("relative_entropy", &series, aborted),
            reconstructions: runs.into_iter().map(|r| r.2).collect(),
        });
    }
    Ok(TomographyResult { ensembles })
}

impl TomographyResult {
    pub fn ensemble(&self, target: &str) -> Option<&TargetEnsemble> {
        self.ensembles.iter().find(|e| e.target == target)
    }

    pub fn output(&self, _config: &ExperimentConfig) -> Result<RunOutput> {
        let mut artifacts = Vec::new();
        let mut results = serde_json::Map::new();
        for e in &self.ensembles {
            artifacts.push(Artifact::new(
                format!("tomography_{}.csv", e.target),
                e.relative_entropy.to_csv(),
            ));
            artifacts.push(Artifact::json(
                format!("reconstructions_{}.json", e.target),
                &e.reconstructions,
            )?);
            results.insert(
                e.target.clone(),
                json!({
                    "final": e.relative_entropy.final_percentiles(),
                    "finals": e.relative_entropy.finals,
                    "aborted": e.relative_entropy.aborted,
                }),
            );
        }
        Ok(RunOutput {
            summary: json!({ "metric": "relative_entropy", "targets": results }),
            artifacts,
            passed: true,
        })
    }
}
