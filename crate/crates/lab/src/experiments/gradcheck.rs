//! Analytic gradients against central finite differences of the objective
//! each one differentiates.

use anyhow::Result;
use qbm_core::datasets::{random_density, random_povm};
use qbm_core::linalg::spectral_norm;
use qbm_core::operators::HamiltonianModel;
use qbm_core::training::{
    central_difference, grad_povm_commutator, grad_povm_exact, grad_povm_gt, grad_relent, objective_povm_exact,
    objective_povm_gt, objective_relent, relative_error, StateTrainingSet,
};
use qbm_core::RngStream;
use rand_distr::{Distribution, Uniform};
use serde::Serialize;
use serde_json::json;

use super::{gaussian_vector, instance_seed, par_map};
use crate::config::{ExperimentConfig, FamilyName};
use crate::output::{Artifact, RunOutput};
use crate::stats::median;

pub const MAX_QUBITS: usize = 3;
pub const GT_TOLERANCE: f64 = 1e-5;
pub const COMMUTATOR_TOLERANCE: f64 = 1e-5;
pub const EXACT_TOLERANCE: f64 = 1e-6;
pub const RELENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckedKind {
    GoldenThompson,
    Exact,
    Commutator,
    RelativeEntropy,
}

impl CheckedKind {
    pub const ALL: [CheckedKind; 4] = [
        CheckedKind::GoldenThompson,
        CheckedKind::Exact,
        CheckedKind::Commutator,
        CheckedKind::RelativeEntropy,
    ];

    pub fn tolerance(self) -> f64 {
        match self {
            CheckedKind::GoldenThompson => GT_TOLERANCE,
            CheckedKind::Exact => EXACT_TOLERANCE,
            CheckedKind::Commutator => COMMUTATOR_TOLERANCE,
            CheckedKind::RelativeEntropy => RELENT_TOLERANCE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckedKind::GoldenThompson => "gt",
            CheckedKind::Exact => "exact",
            CheckedKind::Commutator => "commutator",
            CheckedKind::RelativeEntropy => "relent",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckRow {
    pub family: &'static str,
    pub kind: CheckedKind,
    pub instances: usize,
    pub max_relative_error: f64,
    pub median_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub rows: Vec<GradcheckRow>,
    /// Median over all instances of the order-k commutator error against the
    /// exact gradient, k = 1..=commutator_order.
    pub order_sweep: Vec<f64>,
}

/// One random problem: model size, parameters, POVM, state and λ.
struct Problem {
    model: HamiltonianModel,
    theta: Vec<f64>,
    povm: qbm_core::training::PovmTrainingSet,
    state: StateTrainingSet,
    lambda: f64,
}

fn problem(family: FamilyName, seed: u64) -> Result<Problem> {
    let mut rng = RngStream::new(seed);
    let n = Uniform::new_inclusive(family.min_qubits(), MAX_QUBITS)?.sample(&mut rng);
    let n_hidden = if family.supports_hidden() && n == MAX_QUBITS {
        Uniform::new_inclusive(0, 1)?.sample(&mut rng)
    } else {
        0
    };
    let n_visible = n - n_hidden;
    let model = family.build(n_visible, n_hidden)?;
    let theta = gaussian_vector(model.len(), 0.5, &mut rng);
    let povm = random_povm(n_visible, 3, &mut rng)?;
    let state = StateTrainingSet::new(random_density(n_visible, &mut rng)?)?;
    let lambda = Uniform::new(0.0, 0.5)?.sample(&mut rng);
    Ok(Problem {
        model,
        theta,
        povm,
        state,
        lambda,
    })
}

/// Errors of every checked kind on one problem, plus the order sweep.
fn check(p: &Problem, config: &ExperimentConfig) -> Result<([f64; 4], Vec<f64>)> {
    let (m, set, lambda, h) = (&p.model, &p.povm, p.lambda, config.fd_step);
    let theta = &p.theta;

    let g = grad_povm_gt(m, theta, set, lambda, config.clip)?;
    let fd = central_difference(|t| objective_povm_gt(m, t, set, lambda, config.clip), theta, h)?;
    let gt = relative_error(g.values(), &fd);

    let g = grad_povm_exact(m, theta, set, lambda)?;
    let fd = central_difference(|t| objective_povm_exact(m, t, set, lambda), theta, h)?;
    let exact = relative_error(g.values(), &fd);

    // the series is compared at ‖H‖₂ = 1, where the configured order
    // truncates below the finite-difference noise
    let norm = spectral_norm(&m.assemble(theta)?)?;
    let unit: Vec<f64> = theta.iter().map(|x| x / norm).collect();
    let g = grad_povm_commutator(m, &unit, set, lambda, config.commutator_order)?;
    let fd = central_difference(|t| objective_povm_exact(m, t, set, lambda), &unit, h)?;
    let commutator = relative_error(g.values(), &fd);
    let exact_unit = grad_povm_exact(m, &unit, set, lambda)?;
    let sweep = (1..=config.commutator_order)
        .map(|k| {
            let g = grad_povm_commutator(m, &unit, set, lambda, k)?;
            Ok(relative_error(g.values(), exact_unit.values()))
        })
        .collect::<Result<Vec<f64>>>()?;

    let g = grad_relent(m, theta, &p.state, lambda)?;
    let fd = central_difference(|t| objective_relent(m, t, &p.state, lambda), theta, h)?;
    let relent = relative_error(g.values(), &fd);

    Ok(([gt, exact, commutator, relent], sweep))
}

pub fn gradcheck(config: &ExperimentConfig) -> Result<GradcheckReport> {
    let mut rows = Vec::new();
    let mut sweeps = Vec::new();
    for (stream, family) in FamilyName::ALL.into_iter().enumerate() {
        let results = par_map(config.ensemble, |i| {
            check(&problem(family, instance_seed(config.seed, stream as u64, i))?, config)
        })?;
        for (col, kind) in CheckedKind::ALL.into_iter().enumerate() {
            let errors: Vec<f64> = results.iter().map(|r| r.0[col]).collect();
            let max = errors.iter().copied().fold(0.0, f64::max);
            let finite = errors.iter().all(|e| e.is_finite());
            rows.push(GradcheckRow {
                family: family.name(),
                kind,
                instances: errors.len(),
                max_relative_error: max,
                median_relative_error: median(&errors),
                tolerance: kind.tolerance(),
                passed: finite && max < kind.tolerance(),
            });
        }
        sweeps.extend(results.into_iter().map(|r| r.1));
    }
    let order_sweep = (0..config.commutator_order)
        .map(|k| median(&sweeps.iter().map(|s| s[k]).collect::<Vec<f64>>()))
        .collect();
    Ok(GradcheckReport { rows, order_sweep })
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn row(&self, family: FamilyName, kind: CheckedKind) -> Option<&GradcheckRow> {
        self.rows.iter().find(|r| r.family == family.name() && r.kind == kind)
    }

    pub fn output(&self) -> Result<RunOutput> {
        let mut table =
            String::from("family,kind,instances,max_relative_error,median_relative_error,tolerance,passed\n");
        for r in &self.rows {
            table.push_str(&format!(
                "{},{},{},{:?},{:?},{:?},{}\n",
                r.family,
                r.kind.name(),
                r.instances,
                r.max_relative_error,
                r.median_relative_error,
                r.tolerance,
                r.passed
            ));
        }
        let mut sweep = String::from("order,median_relative_error\n");
        for (k, e) in self.order_sweep.iter().enumerate() {
            sweep.push_str(&format!("{},{e:?}\n", k + 1));
        }
        Ok(RunOutput {
            summary: json!({ "rows": self.rows, "order_sweep": self.order_sweep }),
            artifacts: vec![
                Artifact::new("gradcheck.csv", table.into_bytes()),
                Artifact::new("order_sweep.csv", sweep.into_bytes()),
            ],
            passed: self.passed(),
        })
    }

    /// Fixed-width table for the terminal.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<18} {:<11} {:>9} {:>12} {:>10}  status\n",
            "family", "kind", "instances", "max rel err", "tolerance"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<18} {:<11} {:>9} {:>12.3e} {:>10.0e}  {}\n",
                r.family,
                r.kind.name(),
                r.instances,
                r.max_relative_error,
                r.tolerance,
                if r.passed { "ok" } else { "FAIL" }
            ));
        }
        out
    }
}
