//! Shot-noise estimators of term expectations and of the relative-entropy
//! gradient.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{QbmError, Result};
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, DensityMatrix, Gibbs};
use crate::operators::HamiltonianModel;
use crate::rng::{derive_seed, RngStream};

use super::data::{PreparedState, StateTrainingSet};
use super::GradientVector;

const NORM_TOLERANCE: f64 = 1e-9;

/// Measurement statistics of one observable in one state: outcome `λ_i` with
/// probability `⟨v_i|ρ|v_i⟩`.
#[derive(Debug, Clone)]
pub struct ExpectationSampler {
    outcomes: Vec<f64>,
    probabilities: Vec<f64>,
    distribution: WeightedIndex<f64>,
}

impl ExpectationSampler {
    pub fn new(state: &DensityMatrix, term: &ComplexMatrix) -> Result<Self> {
        crate::linalg::ensure_same_dim(state.matrix(), term)?;
        let eig = hermitian_eigendecompose(term)?;
        if eig.spectral_norm() > 1.0 + NORM_TOLERANCE {
            return Err(QbmError::InvalidArgument(format!(
                "sampled terms need spectral norm at most 1, got {}",
                eig.spectral_norm()
            )));
        }
        let rotated = eig.to_eigenbasis(state.matrix());
        let mut probabilities: Vec<f64> = (0..eig.dim()).map(|i| rotated[(i, i)].re.clamp(0.0, 1.0)).collect();
        let total: f64 = probabilities.iter().sum();
        probabilities.iter_mut().for_each(|p| *p /= total);
        let distribution = WeightedIndex::new(&probabilities)
            .map_err(|e| QbmError::InvalidArgument(format!("outcome distribution: {e}")))?;
        Ok(ExpectationSampler {
            outcomes: eig.eigenvalues,
            probabilities,
            distribution,
        })
    }

    /// Exact expectation of the outcome distribution.
    pub fn mean(&self) -> f64 {
        self.outcomes.iter().zip(&self.probabilities).map(|(x, p)| x * p).sum()
    }

    /// Exact variance of a single shot.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.outcomes
            .iter()
            .zip(&self.probabilities)
            .map(|(x, p)| p * (x - mean).powi(2))
            .sum()
    }

    /// Sample mean of `n_samples` shots.
    pub fn sample_mean(&self, n_samples: usize, rng: &mut RngStream) -> Result<f64> {
        if n_samples == 0 {
            return Err(QbmError::InvalidArgument("n_samples must be positive".into()));
        }
        let total: f64 = (0..n_samples)
            .map(|_| self.outcomes[self.distribution.sample(rng)])
            .sum();
        Ok(total / n_samples as f64)
    }
}

/// Sample-mean estimate of `Tr[state · term]`, deterministic given the seed.
pub fn sampled_expectation(
    state: &DensityMatrix,
    term: &ComplexMatrix,
    n_samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    ExpectationSampler::new(state, term)?.sample_mean(n_samples, &mut RngStream::new(rng_seed))
}

/// Samplers for every term, in the data state and in the model's Gibbs
/// state, so repeated gradient draws reuse the spectral work.
#[derive(Debug, Clone)]
pub struct SampledRelentGradient {
    data: Vec<ExpectationSampler>,
    model: Vec<ExpectationSampler>,
    penalty: Vec<f64>,
}

impl SampledRelentGradient {
    pub fn new(model: &HamiltonianModel, theta: &[f64], set: &StateTrainingSet, lambda: f64) -> Result<Self> {
        let state = PreparedState::new(set, model)?;
        let gibbs = Gibbs::new(&model.assemble(theta)?)?;
        Self::from_states(model, theta, &state.rho, &gibbs.state, lambda)
    }

    pub(crate) fn from_states(
        model: &HamiltonianModel,
        theta: &[f64],
        data: &DensityMatrix,
        gibbs: &DensityMatrix,
        lambda: f64,
    ) -> Result<Self> {
        let mut data_samplers = Vec::with_capacity(model.len());
        let mut model_samplers = Vec::with_capacity(model.len());
        for term in model.terms() {
            data_samplers.push(ExpectationSampler::new(data, &term.matrix)?);
            model_samplers.push(ExpectationSampler::new(gibbs, &term.matrix)?);
        }
        let penalty = model
            .terms()
            .iter()
            .zip(theta)
            .map(|(t, x)| if t.is_quantum { lambda * x } else { 0.0 })
            .collect();
        Ok(SampledRelentGradient {
            data: data_samplers,
            model: model_samplers,
            penalty,
        })
    }

    /// The estimator's mean, i.e. the exact gradient.
    pub fn mean(&self) -> GradientVector {
        GradientVector::new(
            self.data
                .iter()
                .zip(&self.model)
                .zip(&self.penalty)
                .map(|((d, m), r)| m.mean() - d.mean() - r)
                .collect(),
        )
    }

    /// `Σ_j V(G_j)` for `n_samples` shots per expectation.
    pub fn total_variance(&self, n_samples: usize) -> f64 {
        self.data
            .iter()
            .zip(&self.model)
            .map(|(d, m)| (d.variance() + m.variance()) / n_samples as f64)
            .sum()
    }

    /// One gradient draw. Component `j` uses sub-seeds `2j` (data) and `2j+1`
    /// (model) of `rng_seed`.
    pub fn sample(&self, n_samples: usize, rng_seed: u64) -> Result<GradientVector> {
        let mut values = Vec::with_capacity(self.data.len());
        for (j, ((d, m), r)) in self.data.iter().zip(&self.model).zip(&self.penalty).enumerate() {
            let mut data_rng = RngStream::new(derive_seed(rng_seed, 2 * j as u64));
            let mut model_rng = RngStream::new(derive_seed(rng_seed, 2 * j as u64 + 1));
            let data_mean = d.sample_mean(n_samples, &mut data_rng)?;
            let model_mean = m.sample_mean(n_samples, &mut model_rng)?;
            values.push(model_mean - data_mean - r);
        }
        Ok(GradientVector::new(values))
    }
}

/// Relative-entropy gradient with every expectation replaced by a sample
/// mean of `n_samples` shots.
pub fn grad_relent_sampled(
    model: &HamiltonianModel,
    theta: &[f64],
    set: &StateTrainingSet,
    lambda: f64,
    n_samples: usize,
    rng_seed: u64,
) -> Result<GradientVector> {
    SampledRelentGradient::new(model, theta, set, lambda)?.sample(n_samples, rng_seed)
}
