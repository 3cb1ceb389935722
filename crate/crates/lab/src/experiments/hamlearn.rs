//! Hamiltonian learning from thermal states of random transverse-Ising
//! teachers.

use anyhow::Result;
use qbm_core::datasets::random_ti_teacher;
use qbm_core::linalg::frobenius_norm;
use qbm_core::training::{relative_entropy_to_model, train};
use qbm_core::RngStream;
use serde_json::json;

use super::{gaussian_vector, instance_seed, par_map};
use crate::config::ExperimentConfig;
use crate::output::{Artifact, RunOutput};
use crate::stats::EnsembleSummary;

#[derive(Debug, Clone)]
pub struct TeacherEnsemble {
    /// `normalized` (‖H‖₂ = 1) or `unnormalized` (unit-variance couplings).
    pub variant: String,
    pub relative_entropy: EnsembleSummary,
    /// `‖H(θ) − H_true‖_F` per epoch.
    pub delta_h: EnsembleSummary,
}

#[derive(Debug, Clone)]
pub struct HamlearnResult {
    pub ensembles: Vec<TeacherEnsemble>,
}

pub fn run_hamlearn(config: &ExperimentConfig) -> Result<HamlearnResult> {
    let n = config.n_visible;
    let opt = config.optimizer();
    let mut ensembles = Vec::new();
    for (stream, variant) in config.targets.iter().enumerate() {
        let normalize = variant == "normalized";
        let runs = par_map(config.ensemble, |i| {
            let seed = instance_seed(config.seed, stream as u64, i);
            let mut rng = RngStream::new(seed);
            let teacher = random_ti_teacher(n, normalize, &mut rng)?;
            let student = &teacher.model;
            let theta0 = gaussian_vector(student.len(), config.init_scale, &mut rng);
            let trace = train(student, &theta0, (&teacher.target).into(), &opt, seed)?;
            let h_true = student.assemble(&teacher.theta)?;
            let mut s = Vec::with_capacity(trace.records.len());
            let mut dh = Vec::with_capacity(trace.records.len());
            for r in &trace.records {
                s.push(relative_entropy_to_model(student, &r.theta, &teacher.target)?);
                dh.push(frobenius_norm(&(student.assemble(&r.theta)? - &h_true)));
            }
            Ok((s, dh, trace.is_aborted()))
        })?;
        let aborted = runs.iter().filter(|r| r.2).count();
        let s: Vec<Vec<f64>> = runs.iter().map(|r| r.0.clone()).collect();
        let dh: Vec<Vec<f64>> = runs.iter().map(|r| r.1.clone()).collect();
        ensembles.push(TeacherEnsemble {
            variant: variant.clone(),
            relative_entropy: EnsembleSummary::from_series("relative_entropy", &s, aborted),
            delta_h: EnsembleSummary::from_series("delta_h", &dh, aborted),
        });
    }
    Ok(HamlearnResult { ensembles })
}

impl HamlearnResult {
    pub fn ensemble(&self, variant: &str) -> Option<&TeacherEnsemble> {
        self.ensembles.iter().find(|e| e.variant == variant)
    }

    pub fn output(&self, config: &ExperimentConfig) -> Result<RunOutput> {
        let mut artifacts = Vec::new();
        let mut results = serde_json::Map::new();
        for e in &self.ensembles {
            let stem = format!("hamlearn_n{}_{}", config.n_visible, e.variant);
            artifacts.push(Artifact::new(
                format!("{stem}_relative_entropy.csv"),
                e.relative_entropy.to_csv(),
            ));
            artifacts.push(Artifact::new(format!("{stem}_delta_h.csv"), e.delta_h.to_csv()));
            results.insert(
                e.variant.clone(),
                json!({
                    "relative_entropy": e.relative_entropy.final_percentiles(),
                    "delta_h": e.delta_h.final_percentiles(),
                    "aborted": e.relative_entropy.aborted,
                }),
            );
        }
        Ok(RunOutput {
            summary: json!({ "n": config.n_visible, "variants": results }),
            artifacts,
            passed: true,
        })
    }
}
