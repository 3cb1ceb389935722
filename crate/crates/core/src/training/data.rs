use crate::error::{QbmError, Result};
use crate::linalg::{
    clip_psd, ensure_square, frobenius_norm, hermitian_deviation, hermitian_eigendecompose, hermitize, identity, kron,
    matrix_log_psd, ComplexMatrix, DensityMatrix,
};
use crate::operators::HamiltonianModel;

const EFFECT_TOLERANCE: f64 = 1e-10;
const COMPLETENESS_TOLERANCE: f64 = 1e-9;
const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// One measurement outcome: a PSD effect `Λ_v` on the visible units and its
/// empirical frequency `P_v`.
#[derive(Debug, Clone)]
pub struct PovmElement {
    pub effect: ComplexMatrix,
    pub probability: f64,
}

/// Training data for POVM-based training.
#[derive(Debug, Clone)]
pub struct PovmTrainingSet {
    elements: Vec<PovmElement>,
    visible_dim: usize,
}

impl PovmTrainingSet {
    /// Validates positivity of every effect, `Σ Λ_v = I` and `Σ P_v = 1`.
    pub fn new(elements: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        let set = Self::unchecked(elements)?;
        let mut total = ComplexMatrix::zeros(set.visible_dim, set.visible_dim);
        for e in &set.elements {
            let min = hermitian_eigendecompose(&e.effect)?.min_eigenvalue();
            if min < -EFFECT_TOLERANCE {
                return Err(QbmError::InvalidPovm(format!("effect has eigenvalue {min:.3e}")));
            }
            total += &e.effect;
        }
        let gap = frobenius_norm(&(total - identity(set.visible_dim)));
        if gap > COMPLETENESS_TOLERANCE {
            return Err(QbmError::InvalidPovm(format!(
                "effects sum to identity only within {gap:.3e}"
            )));
        }
        let mass: f64 = set.elements.iter().map(|e| e.probability).sum();
        if (mass - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(QbmError::InvalidPovm(format!("probabilities sum to {mass}")));
        }
        Ok(set)
    }

    /// Shape, Hermiticity and sign checks only.
    fn unchecked(elements: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| QbmError::InvalidPovm("no elements".into()))?;
        let visible_dim = ensure_square(&first.0)?;
        if !visible_dim.is_power_of_two() {
            return Err(QbmError::InvalidPovm(format!(
                "dimension {visible_dim} is not a power of two"
            )));
        }
        let mut out = Vec::with_capacity(elements.len());
        for (effect, probability) in elements {
            let d = ensure_square(&effect)?;
            if d != visible_dim {
                return Err(QbmError::DimensionMismatch {
                    expected: visible_dim,
                    found: d,
                });
            }
            if hermitian_deviation(&effect) > EFFECT_TOLERANCE {
                return Err(QbmError::InvalidPovm("effect is not Hermitian".into()));
            }
            if !(probability >= 0.0) || !probability.is_finite() {
                return Err(QbmError::InvalidPovm(format!("probability {probability} is not valid")));
            }
            out.push(PovmElement {
                effect: hermitize(&effect),
                probability,
            });
        }
        Ok(PovmTrainingSet {
            elements: out,
            visible_dim,
        })
    }

    /// Every effect with eigenvalues raised to at least `clip`.
    ///
    /// The result no longer sums to the identity; it is the operator set the
    /// Golden-Thompson bound is tight against.
    pub fn clipped(&self, clip: f64) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|e| Ok((clip_psd(&e.effect, clip)?, e.probability)))
            .collect::<Result<Vec<_>>>()?;
        Self::unchecked(elements)
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn visible_dim(&self) -> usize {
        self.visible_dim
    }

    pub fn n_visible(&self) -> usize {
        self.visible_dim.trailing_zeros() as usize
    }

    /// `Σ_v P_v log P_v`, the largest attainable average log-likelihood.
    pub fn max_log_likelihood(&self) -> f64 {
        self.elements
            .iter()
            .filter(|e| e.probability > 0.0)
            .map(|e| e.probability * e.probability.ln())
            .sum()
    }

    pub(crate) fn check_model(&self, model: &HamiltonianModel) -> Result<()> {
        if self.visible_dim != model.visible_dim() {
            return Err(QbmError::DimensionMismatch {
                expected: model.visible_dim(),
                found: self.visible_dim,
            });
        }
        Ok(())
    }
}

/// Training data for state-based training.
#[derive(Debug, Clone)]
pub struct StateTrainingSet {
    rho: DensityMatrix,
}

impl StateTrainingSet {
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        if !rho.dim().is_power_of_two() {
            return Err(QbmError::InvalidArgument(format!(
                "state dimension {} is not a power of two",
                rho.dim()
            )));
        }
        Ok(StateTrainingSet { rho })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn visible_dim(&self) -> usize {
        self.rho.dim()
    }

    pub(crate) fn check_model(&self, model: &HamiltonianModel) -> Result<()> {
        if self.visible_dim() != model.visible_dim() {
            return Err(QbmError::DimensionMismatch {
                expected: model.visible_dim(),
                found: self.visible_dim(),
            });
        }
        Ok(())
    }
}

/// POVM effects padded as `Λ_v ⊗ I_hidden`, with elements of zero weight
/// dropped. `log_effects` is filled on demand for Golden-Thompson training.
#[derive(Debug, Clone)]
pub(crate) struct PreparedPovm {
    pub effects: Vec<ComplexMatrix>,
    pub probabilities: Vec<f64>,
    pub log_effects: Vec<ComplexMatrix>,
}

impl PreparedPovm {
    pub fn new(set: &PovmTrainingSet, model: &HamiltonianModel, log_clip: Option<f64>) -> Result<Self> {
        set.check_model(model)?;
        let pad = identity(model.hidden_dim());
        let mut effects = Vec::new();
        let mut probabilities = Vec::new();
        let mut log_effects = Vec::new();
        for e in set.elements().iter().filter(|e| e.probability > 0.0) {
            effects.push(kron(&e.effect, &pad));
            probabilities.push(e.probability);
            if let Some(clip) = log_clip {
                // log(Λ ⊗ I) = log Λ ⊗ I
                log_effects.push(kron(&matrix_log_psd(&e.effect, clip)?, &pad));
            }
        }
        Ok(PreparedPovm {
            effects,
            probabilities,
            log_effects,
        })
    }
}

/// Visible state embedded as `ρ ⊗ I/2^h`, with its von Neumann entropy.
#[derive(Debug, Clone)]
pub(crate) struct PreparedState {
    pub rho: DensityMatrix,
    pub entropy: f64,
}

impl PreparedState {
    pub fn new(set: &StateTrainingSet, model: &HamiltonianModel) -> Result<Self> {
        set.check_model(model)?;
        let hidden = model.hidden_dim();
        let entropy = set.rho().von_neumann_entropy()? + (hidden as f64).ln();
        let rho = if hidden == 1 {
            set.rho().clone()
        } else {
            set.rho().tensor(&DensityMatrix::maximally_mixed(hidden))
        };
        Ok(PreparedState { rho, entropy })
    }
}
