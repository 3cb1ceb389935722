//! Mean-field approximation of transverse-Ising thermal states.

use anyhow::Result;
use qbm_core::datasets::{random_ti_teacher, ComplexArray};
use qbm_core::training::{relative_entropy_to_model, train};
use qbm_core::{Gibbs, RngStream};
use serde::Serialize;
use serde_json::json;

use super::{gaussian_vector, instance_seed, par_map};
use crate::config::ExperimentConfig;
use crate::output::{Artifact, RunOutput};
use crate::stats::EnsembleSummary;

/// Teacher state and trained mean-field state of one instance.
#[derive(Debug, Clone, Serialize)]
pub struct StatePair {
    pub instance: usize,
    pub teacher: ComplexArray,
    pub mean_field: ComplexArray,
}

#[derive(Debug, Clone)]
pub struct MeanfieldResult {
    pub relative_entropy: EnsembleSummary,
    /// `Tr(ρσ)` per epoch.
    pub overlap: EnsembleSummary,
    pub first_instance: StatePair,
}

pub fn run_meanfield(config: &ExperimentConfig) -> Result<MeanfieldResult> {
    let n = config.n_visible;
    let student = config.family.build(n, 0)?;
    let opt = config.optimizer();
    let runs = par_map(config.ensemble, |i| {
        let seed = instance_seed(config.seed, 0, i);
        let mut rng = RngStream::new(seed);
        let teacher = random_ti_teacher(n, false, &mut rng)?;
        let theta0 = gaussian_vector(student.len(), config.init_scale, &mut rng);
        let trace = train(&student, &theta0, (&teacher.target).into(), &opt, seed)?;
        let mut s = Vec::with_capacity(trace.records.len());
        let mut overlap = Vec::with_capacity(trace.records.len());
        let mut sigma = None;
        for r in &trace.records {
            s.push(relative_entropy_to_model(&student, &r.theta, &teacher.target)?);
            let state = Gibbs::new(&student.assemble(&r.theta)?)?.state;
            overlap.push(teacher.target.rho().overlap(&state));
            sigma = Some(state);
        }
        let pair = (i == 0).then(|| StatePair {
            instance: i,
            teacher: ComplexArray::from_matrix(teacher.target.rho().matrix()),
            mean_field: ComplexArray::from_matrix(sigma.as_ref().expect("at least one record").matrix()),
        });
        Ok((s, overlap, trace.is_aborted(), pair))
    })?;
    let aborted = runs.iter().filter(|r| r.2).count();
    let s: Vec<Vec<f64>> = runs.iter().map(|r| r.0.clone()).collect();
    let overlap: Vec<Vec<f64>> = runs.iter().map(|r| r.1.clone()).collect();
    let first_instance = runs.into_iter().find_map(|r| r.3).expect("ensemble is non-empty");
    Ok(MeanfieldResult {
        relative_entropy: EnsembleSummary::from_series("relative_entropy", &s, aborted),
        overlap: EnsembleSummary::from_series("overlap", &overlap, aborted),
        first_instance,
    })
}

impl MeanfieldResult {
    pub fn output(&self, config: &ExperimentConfig) -> Result<RunOutput> {
        let stem = format!("meanfield_n{}", config.n_visible);
        let artifacts = vec![
            Artifact::new(format!("{stem}_relative_entropy.csv"), self.relative_entropy.to_csv()),
            Artifact::new(format!("{stem}_overlap.csv"), self.overlap.to_csv()),
            Artifact::json(format!("{stem}_instance0.json"), &self.first_instance)?,
        ];
        Ok(RunOutput {
            summary: json!({
                "n": config.n_visible,
                "relative_entropy": self.relative_entropy.final_percentiles(),
                "overlap": self.overlap.final_percentiles(),
                "aborted": self.relative_entropy.aborted,
            }),
            artifacts,
            passed: true,
        })
    }
}
