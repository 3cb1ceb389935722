//! One module per experiment. Each `run_*` function returns typed results;
//! [`run_experiment`] turns them into files.

pub mod commutator;
pub mod gradcheck;
pub mod hamlearn;
pub mod meanfield;
pub mod povm;
pub mod tomography;
pub mod variance;

use anyhow::Result;
use qbm_core::rng::derive_seed;
use qbm_core::RngStream;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::RunOutput;

pub use commutator::{run_commutator_compare, CommutatorResult};
pub use gradcheck::{gradcheck, GradcheckReport};
pub use hamlearn::{run_hamlearn, HamlearnResult};
pub use meanfield::{run_meanfield, MeanfieldResult};
pub use povm::{run_povm_experiment, PovmResult};
pub use tomography::{run_tomography_ensemble, TomographyResult};
pub use variance::{run_variance_sweep, VarianceReport};

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    match config.experiment {
        Experiment::PovmTrain => run_povm_experiment(config)?.output(config),
        Experiment::Tomography => run_tomography_ensemble(config)?.output(config),
        Experiment::Hamlearn => run_hamlearn(config)?.output(config),
        Experiment::Meanfield => run_meanfield(config)?.output(config),
        Experiment::CommutatorCompare => run_commutator_compare(config)?.output(config),
        Experiment::Gradcheck => gradcheck(config)?.output(),
        Experiment::VarianceSweep => run_variance_sweep(config)?.output(),
    }
}

/// Seed of instance `index` in sub-experiment `stream`.
pub(crate) fn instance_seed(seed: u64, stream: u64, index: usize) -> u64 {
    derive_seed(derive_seed(seed, stream), index as u64)
}

pub(crate) fn gaussian_vector(len: usize, scale: f64, rng: &mut RngStream) -> Vec<f64> {
    (0..len)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect()
}

/// Runs `f(0..n)` in parallel and returns the results in index order.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    (0..n).into_par_iter().map(&f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_seeds_are_distinct_across_streams_and_indices() {
        let mut seen = std::collections::HashSet::new();
        for stream in 0..4 {
            for index in 0..50 {
                assert!(seen.insert(instance_seed(9, stream, index)));
            }
        }
        assert_eq!(instance_seed(9, 1, 2), instance_seed(9, 1, 2));
        assert_ne!(instance_seed(9, 1, 2), instance_seed(10, 1, 2));
    }

    #[test]
    fn par_map_keeps_index_order_and_propagates_errors() {
        assert_eq!(par_map(6, |i| Ok(i * i)).unwrap(), vec![0, 1, 4, 9, 16, 25]);
        let failed = par_map(6, |i| if i == 3 { anyhow::bail!("instance {i}") } else { Ok(i) });
        assert!(failed.unwrap_err().to_string().contains("instance 3"));
    }

    #[test]
    fn gaussian_vector_scales() {
        let v = gaussian_vector(4000, 0.5, &mut RngStream::new(1));
        let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((var - 0.25).abs() < 0.02, "{var}");
        assert!(gaussian_vector(5, 0.0, &mut RngStream::new(1))
            .iter()
            .all(|&x| x == 0.0));
    }
}
