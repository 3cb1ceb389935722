#![allow(dead_code)]

use qbm_core::datasets::{random_density, random_povm};
use qbm_core::operators::{complete_graph, HamiltonianModel, ModelFamily};
use qbm_core::training::{PovmTrainingSet, StateTrainingSet};
use qbm_core::RngStream;
use rand_distr::{Distribution, StandardNormal};

/// Every family buildable on `n` all-visible qubits.
pub fn families(n: usize) -> Vec<ModelFamily> {
    let mut out = vec![
        ModelFamily::ClassicalBm {
            edges: complete_graph(n),
        },
        ModelFamily::TransverseIsing,
        ModelFamily::CompletePauli,
        ModelFamily::MeanField,
    ];
    if n >= 2 {
        out.push(ModelFamily::Fermionic);
    }
    out
}

pub fn gaussian_theta(len: usize, scale: f64, rng: &mut RngStream) -> Vec<f64> {
    (0..len)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect()
}

pub fn model(family: &ModelFamily, n: usize) -> HamiltonianModel {
    HamiltonianModel::build(family, n, 0).unwrap()
}

pub fn povm(n: usize, rng: &mut RngStream) -> PovmTrainingSet {
    random_povm(n, 3, rng).unwrap()
}

pub fn state(n: usize, rng: &mut RngStream) -> StateTrainingSet {
    StateTrainingSet::new(random_density(n, rng).unwrap()).unwrap()
}
