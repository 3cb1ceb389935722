//! Experiment configuration: built-in defaults, then a flat TOML file, then
//! command-line overrides, each layer replacing keys of the one before.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use qbm_core::operators::{complete_graph, HamiltonianModel, ModelFamily};
use qbm_core::training::{GradientKind, OptimizerConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PovmTrain,
    Tomography,
    Hamlearn,
    Meanfield,
    CommutatorCompare,
    Gradcheck,
    VarianceSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::PovmTrain,
        Experiment::Tomography,
        Experiment::Hamlearn,
        Experiment::Meanfield,
        Experiment::CommutatorCompare,
        Experiment::Gradcheck,
        Experiment::VarianceSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PovmTrain => "povm-train",
            Experiment::Tomography => "tomography",
            Experiment::Hamlearn => "hamlearn",
            Experiment::Meanfield => "meanfield",
            Experiment::CommutatorCompare => "commutator-compare",
            Experiment::Gradcheck => "gradcheck",
            Experiment::VarianceSweep => "variance-sweep",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .with_context(|| format!("unknown experiment {s:?}"))
    }
}

/// Model family by name. `classical_bm` uses the complete graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    ClassicalBm,
    TransverseIsing,
    CompletePauli,
    MeanField,
    Fermionic,
}

impl FamilyName {
    pub const ALL: [FamilyName; 5] = [
        FamilyName::ClassicalBm,
        FamilyName::TransverseIsing,
        FamilyName::CompletePauli,
        FamilyName::MeanField,
        FamilyName::Fermionic,
    ];

    pub fn family(self, n_qubits: usize) -> ModelFamily {
        match self {
            FamilyName::ClassicalBm => ModelFamily::ClassicalBm {
                edges: complete_graph(n_qubits),
            },
            FamilyName::TransverseIsing => ModelFamily::TransverseIsing,
            FamilyName::CompletePauli => ModelFamily::CompletePauli,
            FamilyName::MeanField => ModelFamily::MeanField,
            FamilyName::Fermionic => ModelFamily::Fermionic,
        }
    }

    pub fn build(self, n_visible: usize, n_hidden: usize) -> qbm_core::Result<HamiltonianModel> {
        HamiltonianModel::build(&self.family(n_visible + n_hidden), n_visible, n_hidden)
    }

    pub fn supports_hidden(self) -> bool {
        matches!(self, FamilyName::ClassicalBm | FamilyName::Fermionic)
    }

    pub fn min_qubits(self) -> usize {
        if self == FamilyName::Fermionic {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyName::ClassicalBm => "classical_bm",
            FamilyName::TransverseIsing => "transverse_ising",
            FamilyName::CompletePauli => "complete_pauli",
            FamilyName::MeanField => "mean_field",
            FamilyName::Fermionic => "fermionic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub family: FamilyName,
    pub n_visible: usize,
    pub n_hidden: usize,
    /// Visible sizes swept by `povm-train`.
    pub n_visible_grid: Vec<usize>,
    /// Hidden sizes swept by `povm-train`.
    pub n_hidden_grid: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub lambda: f64,
    pub gradient_kind: GradientKind,
    /// Order used whenever a commutator gradient is requested.
    pub commutator_order: usize,
    /// Eigenvalue floor for `log Λ` in Golden-Thompson gradients.
    pub clip: f64,
    pub ensemble: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Standard deviation of the Gaussian initial parameters.
    pub init_scale: f64,
    /// Bit-flip probability of the step-function target.
    pub noise_p: f64,
    /// Target variants: `mixed`/`pure` for tomography,
    /// `normalized`/`unnormalized` for hamlearn.
    pub targets: Vec<String>,
    /// Shot counts swept by `variance-sweep`.
    pub n_samples: Vec<usize>,
    pub repetitions: usize,
    pub fd_step: f64,
    /// Write wall-clock times into trace CSVs (breaks byte-identical reruns).
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            family: FamilyName::Fermionic,
            n_visible: 2,
            n_hidden: 0,
            n_visible_grid: vec![3, 4, 5],
            n_hidden_grid: vec![0, 1, 2, 3],
            learning_rate: 0.1,
            momentum: 0.0,
            epochs: 100,
            lambda: 0.0,
            gradient_kind: GradientKind::GoldenThompson,
            commutator_order: 5,
            clip: qbm_core::linalg::DEFAULT_LOG_CLIP,
            ensemble: 100,
            seed: 0,
            out: PathBuf::from("out").join(experiment.name()),
            init_scale: 0.1,
            noise_p: qbm_core::datasets::DEFAULT_NOISE,
            targets: Vec::new(),
            n_samples: vec![16, 32, 64, 128, 256, 512, 1024, 2048, 4096],
            repetitions: 200,
            fd_step: 1e-5,
            timing: false,
        };
        match experiment {
            Experiment::PovmTrain => ExperimentConfig {
                epochs: 200,
                learning_rate: 0.1,
                momentum: 0.5,
                ensemble: 1,
                ..base
            },
            Experiment::Tomography => ExperimentConfig {
                family: FamilyName::CompletePauli,
                learning_rate: 1.0,
                gradient_kind: GradientKind::RelativeEntropy,
                targets: vec!["mixed".into(), "pure".into()],
                init_scale: 0.0,
                ..base
            },
            Experiment::Hamlearn => ExperimentConfig {
                family: FamilyName::TransverseIsing,
                learning_rate: 0.5,
                gradient_kind: GradientKind::RelativeEntropy,
                targets: vec!["normalized".into(), "unnormalized".into()],
                ..base
            },
            Experiment::Meanfield => ExperimentConfig {
                family: FamilyName::MeanField,
                n_visible: 5,
                learning_rate: 1.0,
                gradient_kind: GradientKind::RelativeEntropy,
                init_scale: 0.0,
                ..base
            },
            Experiment::CommutatorCompare => ExperimentConfig {
                n_visible: 4,
                epochs: 200,
                learning_rate: 0.1,
                momentum: 0.5,
                // keeps ‖H‖ small enough for the order-5 series to converge
                lambda: 0.1,
                ensemble: 20,
                targets: vec!["povm".into()],
                ..base
            },
            Experiment::Gradcheck => ExperimentConfig {
                family: FamilyName::Fermionic,
                commutator_order: 12,
                ..base
            },
            Experiment::VarianceSweep => ExperimentConfig {
                family: FamilyName::MeanField,
                gradient_kind: GradientKind::RelativeEntropySampled { n_samples: 256 },
                ensemble: 1,
                ..base
            },
        }
    }

    /// Defaults for `experiment`, overlaid with the TOML file at `path` (if
    /// any) and then with `overrides` (`key=value` pairs, TOML values; bare
    /// words are read as strings).
    pub fn resolve(experiment: Experiment, path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = toml::Table::try_from(ExperimentConfig::defaults(experiment))?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: toml::Table = text.parse().with_context(|| format!("parsing {}", path.display()))?;
            if let Some(name) = file.get("experiment") {
                if name.as_str() != Some(experiment.name()) {
                    bail!("config file is for experiment {name}, not {experiment}");
                }
            }
            table.extend(file);
        }
        for (key, value) in overrides {
            table.insert(key.clone(), parse_value(value));
        }
        let config: ExperimentConfig = table.try_into().context("invalid configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble == 0 {
            bail!("ensemble must be at least 1");
        }
        self.optimizer().validate()?;
        qbm_core::training::OptimizerConfig {
            gradient_kind: GradientKind::Commutator {
                order: self.commutator_order,
            },
            ..self.optimizer()
        }
        .validate()?;
        if !(0.0..0.5).contains(&self.noise_p) {
            bail!("noise_p must lie in [0, 0.5)");
        }
        if !(self.init_scale >= 0.0) {
            bail!("init_scale must be non-negative");
        }
        if !(self.fd_step > 0.0) {
            bail!("fd_step must be positive");
        }
        let allowed: &[&str] = match self.experiment {
            Experiment::Tomography => &["mixed", "pure"],
            Experiment::Hamlearn => &["normalized", "unnormalized"],
            Experiment::CommutatorCompare => &["povm", "distribution"],
            _ => &[],
        };
        if !allowed.is_empty() {
            if self.targets.is_empty() {
                bail!("targets must name at least one of {allowed:?}");
            }
            if let Some(t) = self.targets.iter().find(|t| !allowed.contains(&t.as_str())) {
                bail!("unknown target {t:?}; expected one of {allowed:?}");
            }
        }
        if self.experiment == Experiment::CommutatorCompare && self.targets.len() != 1 {
            bail!("commutator-compare takes exactly one target");
        }
        if self.experiment == Experiment::VarianceSweep && (self.n_samples.len() < 2 || self.n_samples.contains(&0)) {
            bail!("n_samples needs at least two positive entries");
        }
        Ok(())
    }

    /// Optimizer settings; a commutator kind takes its order from
    /// `commutator_order`.
    pub fn optimizer(&self) -> OptimizerConfig {
        let gradient_kind = match self.gradient_kind {
            GradientKind::Commutator { .. } => GradientKind::Commutator {
                order: self.commutator_order,
            },
            other => other,
        };
        OptimizerConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            epochs: self.epochs,
            lambda: self.lambda,
            gradient_kind,
            clip: self.clip,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
