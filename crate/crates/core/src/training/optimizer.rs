//! Heavy-ball gradient ascent and the per-epoch training trace.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::linalg::{ComplexMatrix, Gibbs, DEFAULT_LOG_CLIP};
use crate::operators::HamiltonianModel;
use crate::rng::derive_seed;

use super::data::{PovmTrainingSet, PreparedPovm, PreparedState, StateTrainingSet};
use super::povm::{check_order, clamped_states, commutator_gradient, exact_gradient, exact_objective, gt_gradient};
use super::sampling::SampledRelentGradient;
use super::{relent, GradientVector};

/// Which gradient drives the parameter update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GradientKind {
    /// Golden-Thompson lower bound (POVM data).
    GoldenThompson,
    /// Exact Duhamel gradient (POVM data).
    Exact,
    /// Nested-commutator expansion truncated after `order` terms (POVM data).
    Commutator { order: usize },
    /// Exact relative-entropy gradient (state data).
    RelativeEntropy,
    /// Relative-entropy gradient from `n_samples` shots per expectation.
    RelativeEntropySampled { n_samples: usize },
}

impl GradientKind {
    pub fn uses_state_data(self) -> bool {
        matches!(
            self,
            GradientKind::RelativeEntropy | GradientKind::RelativeEntropySampled { .. }
        )
    }
}

impl fmt::Display for GradientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientKind::GoldenThompson => write!(f, "gt"),
            GradientKind::Exact => write!(f, "exact"),
            GradientKind::Commutator { order } => write!(f, "commutator:{order}"),
            GradientKind::RelativeEntropy => write!(f, "relent"),
            GradientKind::RelativeEntropySampled { n_samples } => write!(f, "relent_sampled:{n_samples}"),
        }
    }
}

impl FromStr for GradientKind {
    type Err = QbmError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let number = |default: usize| -> Result<usize> {
            arg.map_or(Ok(default), |a| {
                a.parse()
                    .map_err(|_| QbmError::InvalidArgument(format!("bad gradient argument in {s:?}")))
            })
        };
        match name {
            "gt" => Ok(GradientKind::GoldenThompson),
            "exact" => Ok(GradientKind::Exact),
            "commutator" => Ok(GradientKind::Commutator { order: number(5)? }),
            "relent" => Ok(GradientKind::RelativeEntropy),
            "relent_sampled" => Ok(GradientKind::RelativeEntropySampled {
                n_samples: number(256)?,
            }),
            _ => Err(QbmError::InvalidArgument(format!("unknown gradient kind {s:?}"))),
        }
    }
}

impl TryFrom<String> for GradientKind {
    type Error = QbmError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GradientKind> for String {
    fn from(kind: GradientKind) -> String {
        kind.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// L2 weight on the quantum parameters.
    pub lambda: f64,
    pub gradient_kind: GradientKind,
    /// Eigenvalue floor inside `log Λ_v` for Golden-Thompson gradients.
    pub clip: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.1,
            momentum: 0.0,
            epochs: 100,
            lambda: 0.0,
            gradient_kind: GradientKind::GoldenThompson,
            clip: DEFAULT_LOG_CLIP,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QbmError::InvalidArgument(msg));
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad(format!(
                "learning rate must be non-negative, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        if self.epochs == 0 {
            return bad("epochs must be positive".into());
        }
        if !(self.lambda >= 0.0) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if !(self.clip > 0.0) {
            return bad(format!("clip must be positive, got {}", self.clip));
        }
        match self.gradient_kind {
            GradientKind::Commutator { order } => check_order(order),
            GradientKind::RelativeEntropySampled { n_samples: 0 } => bad("n_samples must be positive".into()),
            _ => Ok(()),
        }
    }
}

/// Training data of either flavor.
#[derive(Debug, Clone, Copy)]
pub enum TrainingData<'a> {
    Povm(&'a PovmTrainingSet),
    State(&'a StateTrainingSet),
}

impl<'a> From<&'a PovmTrainingSet> for TrainingData<'a> {
    fn from(set: &'a PovmTrainingSet) -> Self {
        TrainingData::Povm(set)
    }
}

impl<'a> From<&'a StateTrainingSet> for TrainingData<'a> {
    fn from(set: &'a StateTrainingSet) -> Self {
        TrainingData::State(set)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub theta: Vec<f64>,
    pub objective: f64,
    pub grad_norm: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceStatus {
    Completed,
    /// The objective or gradient went non-finite at `epoch`; the trace stops
    /// at the last finite record.
    Aborted {
        epoch: usize,
        reason: String,
    },
}

/// Record `e` holds the parameters after `e` updates, the monitored
/// objective there, and the norm of the gradient computed there.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    pub status: TraceStatus,
}

impl TrainingTrace {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn final_theta(&self) -> Option<&[f64]> {
        self.last().map(|r| r.theta.as_slice())
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.last().map(|r| r.objective)
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self.status, TraceStatus::Aborted { .. })
    }

    /// CSV with columns `epoch, objective, grad_norm, elapsed_s, theta_0..`.
    ///
    /// With `include_timing` off the elapsed column is written as zero, which
    /// makes the output a pure function of configuration and seed.
    pub fn write_csv<W: Write>(&self, writer: W, include_timing: bool) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let m = self.records.first().map_or(0, |r| r.theta.len());
        let mut header = vec![
            "epoch".to_string(),
            "objective".into(),
            "grad_norm".into(),
            "elapsed_s".into(),
        ];
        header.extend((0..m).map(|j| format!("theta_{j}")));
        out.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.epoch.to_string(),
                fmt_f64(r.objective),
                fmt_f64(r.grad_norm),
                fmt_f64(if include_timing { r.elapsed_s } else { 0.0 }),
            ];
            row.extend(r.theta.iter().map(|&x| fmt_f64(x)));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

enum Prepared {
    Povm(PreparedPovm),
    State(PreparedState),
}

/// Objective-plus-gradient evaluation for one training configuration.
struct Evaluator<'a> {
    model: &'a HamiltonianModel,
    kind: GradientKind,
    lambda: f64,
    data: Prepared,
}

impl<'a> Evaluator<'a> {
    fn new(model: &'a HamiltonianModel, data: TrainingData<'_>, opt: &OptimizerConfig) -> Result<Self> {
        let kind = opt.gradient_kind;
        let data = match (data, kind.uses_state_data()) {
            (TrainingData::Povm(set), false) => {
                let clip = matches!(kind, GradientKind::GoldenThompson).then_some(opt.clip);
                Prepared::Povm(PreparedPovm::new(set, model, clip)?)
            }
            (TrainingData::State(set), true) => Prepared::State(PreparedState::new(set, model)?),
            _ => {
                return Err(QbmError::InvalidArgument(format!(
                    "gradient kind {kind} does not match the training data"
                )))
            }
        };
        Ok(Evaluator {
            model,
            kind,
            lambda: opt.lambda,
            data,
        })
    }

    fn evaluate(&self, theta: &[f64], seed: u64) -> Result<(f64, GradientVector)> {
        let h: ComplexMatrix = self.model.assemble(theta)?;
        let gibbs = Gibbs::new(&h)?;
        let (model, lambda) = (self.model, self.lambda);
        match &self.data {
            Prepared::Povm(povm) => {
                let objective = exact_objective(model, theta, povm, &gibbs, lambda);
                let gradient = match self.kind {
                    GradientKind::GoldenThompson => {
                        let clamped = clamped_states(&h, povm)?;
                        gt_gradient(model, theta, povm, &gibbs, &clamped, lambda)
                    }
                    GradientKind::Exact => exact_gradient(model, theta, povm, &gibbs, lambda),
                    GradientKind::Commutator { order } => {
                        commutator_gradient(model, theta, &h, povm, &gibbs, lambda, order)
                    }
                    _ => unreachable!("state kinds are rejected at construction"),
                };
                Ok((objective, gradient))
            }
            Prepared::State(state) => {
                let objective = relent::objective(model, theta, state, &h, &gibbs, lambda);
                let gradient = match self.kind {
                    GradientKind::RelativeEntropy => relent::gradient(model, theta, state, &gibbs, lambda),
                    GradientKind::RelativeEntropySampled { n_samples } => {
                        SampledRelentGradient::from_states(model, theta, &state.rho, &gibbs.state, lambda)?
                            .sample(n_samples, seed)?
                    }
                    _ => unreachable!("POVM kinds are rejected at construction"),
                };
                Ok((objective, gradient))
            }
        }
    }
}

/// Gradient ascent with heavy-ball momentum: `v ← μv + ηG`, `θ ← θ + v`.
///
/// The monitored objective is the exact log-likelihood for POVM kinds and the
/// negative relative entropy for state kinds. A non-finite objective or
/// gradient stops training and returns the trace so far, marked aborted.
pub fn train(
    model: &HamiltonianModel,
    theta0: &[f64],
    data: TrainingData<'_>,
    opt: &OptimizerConfig,
    rng_seed: u64,
) -> Result<TrainingTrace> {
    train_phases(model, theta0, data, std::slice::from_ref(opt), rng_seed)
}

/// [`train`] through consecutive phases, each running `epochs` steps with its
/// own settings. Velocity and epoch numbering carry across phase boundaries;
/// the final record is evaluated with the last phase.
pub fn train_phases(
    model: &HamiltonianModel,
    theta0: &[f64],
    data: TrainingData<'_>,
    phases: &[OptimizerConfig],
    rng_seed: u64,
) -> Result<TrainingTrace> {
    if phases.is_empty() {
        return Err(QbmError::InvalidArgument(
            "at least one training phase is required".into(),
        ));
    }
    model.check_theta(theta0)?;
    let mut evaluators = Vec::with_capacity(phases.len());
    for opt in phases {
        opt.validate()?;
        evaluators.push(Evaluator::new(model, data, opt)?);
    }
    let total: usize = phases.iter().map(|p| p.epochs).sum();
    let start = Instant::now();
    let mut theta = theta0.to_vec();
    let mut velocity = vec![0.0; theta.len()];
    let mut records = Vec::with_capacity(total + 1);
    let (mut phase, mut phase_end) = (0, phases[0].epochs);
    for epoch in 0..=total {
        while epoch >= phase_end && phase + 1 < phases.len() {
            phase += 1;
            phase_end += phases[phase].epochs;
        }
        let opt = &phases[phase];
        let (objective, gradient) = match evaluators[phase].evaluate(&theta, derive_seed(rng_seed, epoch as u64)) {
            Ok(v) => v,
            Err(QbmError::EigenFailed) => {
                return Ok(aborted(records, epoch, "eigendecomposition failed"));
            }
            Err(e) => return Err(e),
        };
        if !objective.is_finite() || !gradient.is_finite() {
            return Ok(aborted(records, epoch, "non-finite objective or gradient"));
        }
        records.push(EpochRecord {
            epoch,
            theta: theta.clone(),
            objective,
            grad_norm: gradient.norm(),
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if epoch == total {
            break;
        }
        for ((v, x), g) in velocity.iter_mut().zip(theta.iter_mut()).zip(gradient.values()) {
            *v = opt.momentum * *v + opt.learning_rate * g;
            *x += *v;
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Ok(aborted(records, epoch + 1, "non-finite parameters"));
        }
    }
    Ok(TrainingTrace {
        records,
        status: TraceStatus::Completed,
    })
}

fn aborted(records: Vec<EpochRecord>, epoch: usize, reason: &str) -> TrainingTrace {
    TrainingTrace {
        records,
        status: TraceStatus::Aborted {
            epoch,
            reason: reason.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diagonal, identity};
    use crate::operators::build_transverse_ising_complete;

    #[test]
    fn gradient_kind_round_trips_through_text() {
        for kind in [
            GradientKind::GoldenThompson,
            GradientKind::Exact,
            GradientKind::Commutator { order: 7 },
            GradientKind::RelativeEntropy,
            GradientKind::RelativeEntropySampled { n_samples: 64 },
        ] {
            assert_eq!(kind.to_string().parse::<GradientKind>().unwrap(), kind);
        }
        assert_eq!(
            "commutator".parse::<GradientKind>().unwrap(),
            GradientKind::Commutator { order: 5 }
        );
        assert!("newton".parse::<GradientKind>().is_err());
        assert!("commutator:x".parse::<GradientKind>().is_err());
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let model = build_transverse_ising_complete(2).unwrap();
        let set = PovmTrainingSet::new(vec![
            (diagonal(&[1.0, 0.0, 0.0, 0.0]), 0.7),
            (diagonal(&[0.0, 1.0, 1.0, 1.0]), 0.3),
        ])
        .unwrap();
        let opt = OptimizerConfig {
            learning_rate: 0.0,
            epochs: 5,
            ..OptimizerConfig::default()
        };
        let theta0 = [0.1, 0.2, 0.3, 0.4, 0.5];
        let trace = train(&model, &theta0, (&set).into(), &opt, 1).unwrap();
        assert_eq!(trace.records.len(), 6);
        assert!(trace.records.iter().all(|r| r.theta == theta0));
        assert!(trace.records.windows(2).all(|w| w[1].epoch == w[0].epoch + 1));
    }

    #[test]
    fn mismatched_data_kind_is_rejected() {
        let model = build_transverse_ising_complete(1).unwrap();
        let set = PovmTrainingSet::new(vec![(identity(2), 1.0)]).unwrap();
        let opt = OptimizerConfig {
            gradient_kind: GradientKind::RelativeEntropy,
            ..OptimizerConfig::default()
        };
        assert!(train(&model, &[0.0, 0.0], (&set).into(), &opt, 0).is_err());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = [
            OptimizerConfig {
                momentum: 1.0,
                ..Default::default()
            },
            OptimizerConfig {
                epochs: 0,
                ..Default::default()
            },
            OptimizerConfig {
                learning_rate: -1.0,
                ..Default::default()
            },
            OptimizerConfig {
                gradient_kind: GradientKind::Commutator { order: 13 },
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn divergent_training_aborts_with_partial_trace() {
        let model = build_transverse_ising_complete(1).unwrap();
        let set = PovmTrainingSet::new(vec![(diagonal(&[1.0, 0.0]), 0.5), (diagonal(&[0.0, 1.0]), 0.5)]).unwrap();
        let opt = OptimizerConfig {
            learning_rate: 1e308,
            epochs: 10,
            gradient_kind: GradientKind::Exact,
            ..Default::default()
        };
        let trace = train(&model, &[0.5, 0.1], (&set).into(), &opt, 0).unwrap();
        assert!(trace.is_aborted());
        assert!(!trace.records.is_empty());
        assert!(trace.records.iter().all(|r| r.objective.is_finite()));
    }

    #[test]
    fn csv_layout() {
        let model = build_transverse_ising_complete(1).unwrap();
        let set = PovmTrainingSet::new(vec![(identity(2), 1.0)]).unwrap();
        let opt = OptimizerConfig {
            epochs: 2,
            ..Default::default()
        };
        let trace = train(&model, &[0.25, -0.5], (&set).into(), &opt, 0).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "epoch,objective,grad_norm,elapsed_s,theta_0,theta_1");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0.0,0.0,0.0,0.25,-0.5"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn split_phases_match_a_single_run() {
        let model = build_transverse_ising_complete(2).unwrap();
        let set = PovmTrainingSet::new(vec![
            (diagonal(&[1.0, 0.0, 0.5, 0.0]), 0.6),
            (diagonal(&[0.0, 1.0, 0.5, 1.0]), 0.4),
        ])
        .unwrap();
        let opt = OptimizerConfig {
            momentum: 0.5,
            epochs: 8,
            ..Default::default()
        };
        let theta0 = [0.1, -0.2, 0.3, 0.0, 0.2];
        let whole = train(&model, &theta0, (&set).into(), &opt, 3).unwrap();
        let half = OptimizerConfig {
            epochs: 4,
            ..opt.clone()
        };
        let split = train_phases(&model, &theta0, (&set).into(), &[half.clone(), half], 3).unwrap();
        let key = |t: &TrainingTrace| -> Vec<(usize, Vec<f64>, f64)> {
            t.records
                .iter()
                .map(|r| (r.epoch, r.theta.clone(), r.objective))
                .collect()
        };
        assert_eq!(key(&whole), key(&split));
    }

    #[test]
    fn phase_switch_takes_effect_at_its_epoch() {
        let model = build_transverse_ising_complete(1).unwrap();
        let set = PovmTrainingSet::new(vec![(diagonal(&[1.0, 0.0]), 0.8), (diagonal(&[0.0, 1.0]), 0.2)]).unwrap();
        let moving = OptimizerConfig {
            epochs: 2,
            ..Default::default()
        };
        let frozen = OptimizerConfig {
            learning_rate: 0.0,
            epochs: 3,
            ..Default::default()
        };
        let trace = train_phases(&model, &[0.0, 0.0], (&set).into(), &[moving, frozen], 0).unwrap();
        assert_eq!(trace.records.len(), 6);
        assert_ne!(trace.records[1].theta, trace.records[2].theta);
        assert!(trace.records[2..].iter().all(|r| r.theta == trace.records[2].theta));
        assert!(train_phases(&model, &[0.0, 0.0], (&set).into(), &[], 0).is_err());
    }
}
