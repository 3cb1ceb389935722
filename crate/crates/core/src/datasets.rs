//! Training targets: step-function distributions, Haar-random states and
//! thermal teachers.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{QbmError, Result};
use crate::linalg::{c, diagonal, identity, spectral_norm, ComplexMatrix, ComplexVector, DensityMatrix, Gibbs};
use crate::operators::{build_transverse_ising_complete, HamiltonianModel, MAX_QUBITS};
use crate::rng::RngStream;
use crate::training::{PovmTrainingSet, StateTrainingSet};

pub const DEFAULT_NOISE: f64 = 0.1;

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(QbmError::InvalidArgument(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {n}"
        )));
    }
    Ok(())
}

/// Distribution over `n`-bit strings: the `n+1` step vectors `1^k 0^{n-k}`,
/// mixed uniformly, each passed through a bit-flip channel with probability
/// `noise_p` per bit. Index bit `n-1-i` holds bit `i` (qubit 0 is the most
/// significant).
pub fn step_function_distribution(n: usize, noise_p: f64) -> Result<Vec<f64>> {
    check_qubits(n)?;
    if !(0.0..0.5).contains(&noise_p) {
        return Err(QbmError::InvalidArgument(format!(
            "noise_p must lie in [0, 0.5), got {noise_p}"
        )));
    }
    let dim = 1usize << n;
    let mut q = vec![0.0; dim];
    for k in 0..=n {
        // step vector with the first k bits set
        let step: usize = (0..k).map(|i| 1usize << (n - 1 - i)).sum();
        for (x, qx) in q.iter_mut().enumerate() {
            let flips = (x ^ step).count_ones() as i32;
            *qx += noise_p.powi(flips) * (1.0 - noise_p).powi(n as i32 - flips);
        }
    }
    let weight = 1.0 / (n + 1) as f64;
    q.iter_mut().for_each(|x| *x *= weight);
    Ok(q)
}

#[derive(Debug, Clone)]
pub struct StepFunctionTarget {
    pub distribution: Vec<f64>,
    /// `√q_x`, real and nonnegative.
    pub amplitudes: Vec<f64>,
    /// `{|ψ⟩⟨ψ|, I − |ψ⟩⟨ψ|}` with frequencies `(1, 0)`.
    pub povm: PovmTrainingSet,
    pub state: StateTrainingSet,
}

/// Step-function target; deterministic in `(n, noise_p)`.
pub fn step_function_state(n: usize, noise_p: f64) -> Result<StepFunctionTarget> {
    let distribution = step_function_distribution(n, noise_p)?;
    let amplitudes: Vec<f64> = distribution.iter().map(|q| q.sqrt()).collect();
    let psi = ComplexVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&a| c(a, 0.0)));
    let rho = DensityMatrix::pure(&psi)?;
    let projector = rho.matrix().clone();
    let complement = identity(projector.nrows()) - &projector;
    let povm = PovmTrainingSet::new(vec![(projector, 1.0), (complement, 0.0)])?;
    Ok(StepFunctionTarget {
        distribution,
        amplitudes,
        povm,
        state: StateTrainingSet::new(rho)?,
    })
}

/// POVM of computational-basis projectors weighted by `q`.
pub fn classical_povm(q: &[f64]) -> Result<PovmTrainingSet> {
    let dim = q.len();
    PovmTrainingSet::new(
        q.iter()
            .enumerate()
            .map(|(x, &p)| {
                let mut d = vec![0.0; dim];
                d[x] = 1.0;
                (diagonal(&d), p)
            })
            .collect(),
    )
}

fn complex_gaussian(rng: &mut RngStream) -> num_complex::Complex64 {
    c(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-distributed `d×d` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_random_unitary(dim: usize, rng: &mut RngStream) -> ComplexMatrix {
    let z = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Normalized vector of i.i.d. complex Gaussians.
pub fn haar_random_pure_vector(n: usize, rng: &mut RngStream) -> Result<ComplexVector> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let v = ComplexVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    Ok(v.unscale(norm))
}

pub fn haar_random_pure(n: usize, rng: &mut RngStream) -> Result<StateTrainingSet> {
    StateTrainingSet::new(DensityMatrix::pure(&haar_random_pure_vector(n, rng)?)?)
}

/// Spectral pieces of a random mixed state: a Haar unitary whose columns are
/// the eigenvectors, and normalized i.i.d. uniform weights.
pub fn random_mixed_parts(n: usize, rng: &mut RngStream) -> Result<(ComplexMatrix, Vec<f64>)> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let u = haar_random_unitary(dim, rng);
    let mut weights: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((u, weights))
}

pub fn random_mixed(n: usize, rng: &mut RngStream) -> Result<StateTrainingSet> {
    let (u, weights) = random_mixed_parts(n, rng)?;
    let rho = &u * diagonal(&weights) * u.adjoint();
    StateTrainingSet::new(DensityMatrix::new(crate::linalg::hermitize(&rho))?)
}

#[derive(Debug, Clone)]
pub struct Teacher {
    pub model: HamiltonianModel,
    pub theta: Vec<f64>,
    pub target: StateTrainingSet,
}

/// Transverse-Ising teacher on the complete graph with standard Gaussian
/// couplings, optionally rescaled to `‖H‖₂ = 1`; the target is its Gibbs state.
pub fn random_ti_teacher(n: usize, normalize: bool, rng: &mut RngStream) -> Result<Teacher> {
    let model = build_transverse_ising_complete(n)?;
    let mut theta: Vec<f64> = (0..model.len()).map(|_| StandardNormal.sample(rng)).collect();
    if normalize {
        let norm = spectral_norm(&model.assemble(&theta)?)?;
        if norm > 0.0 {
            theta.iter_mut().for_each(|x| *x /= norm);
        }
    }
    let gibbs = Gibbs::new(&model.assemble(&theta)?)?;
    Ok(Teacher {
        model,
        theta,
        target: StateTrainingSet::new(gibbs.state)?,
    })
}

/// Random Hermitian matrix with i.i.d. complex Gaussian entries, scaled by
/// `scale`.
pub fn random_hermitian(dim: usize, scale: f64, rng: &mut RngStream) -> ComplexMatrix {
    let z = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    (&z + z.adjoint()).scale(0.5 * scale)
}

/// Random POVM of `k` effects: `Λ_v = S^{-1/2} G_v S^{-1/2}` with `G_v = A_v A_v†`
/// Gaussian and `S = Σ G_v`; frequencies are normalized uniforms.
pub fn random_povm(n: usize, k: usize, rng: &mut RngStream) -> Result<PovmTrainingSet> {
    check_qubits(n)?;
    if k == 0 {
        return Err(QbmError::InvalidArgument("a POVM needs at least one effect".into()));
    }
    let dim = 1usize << n;
    let grams: Vec<ComplexMatrix> = (0..k)
        .map(|_| {
            let a = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
            &a * a.adjoint()
        })
        .collect();
    let total = grams.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, g| acc + g);
    let eig = crate::linalg::hermitian_eigendecompose(&total)?;
    let inv_sqrt = eig.map(|x| 1.0 / x.sqrt());
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    let elements = grams
        .iter()
        .zip(weights)
        .map(|(g, w)| (crate::linalg::hermitize(&(&inv_sqrt * g * &inv_sqrt)), w))
        .collect();
    PovmTrainingSet::new(elements)
}

/// Random POVM of `k` full-rank diagonal effects: each basis state splits its
/// weight across the effects by normalized uniforms on `[floor, 1)`.
pub fn random_diagonal_povm(n: usize, k: usize, floor: f64, rng: &mut RngStream) -> Result<PovmTrainingSet> {
    check_qubits(n)?;
    if k == 0 || !(0.0..1.0).contains(&floor) {
        return Err(QbmError::InvalidArgument(format!(
            "need k >= 1 and floor in [0, 1), got k = {k}, floor = {floor}"
        )));
    }
    let dim = 1usize << n;
    let mut rows = vec![vec![0.0; dim]; k];
    for x in 0..dim {
        let split: Vec<f64> = (0..k).map(|_| floor + (1.0 - floor) * rng.random::<f64>()).collect();
        let sum: f64 = split.iter().sum();
        for (row, w) in rows.iter_mut().zip(split) {
            row[x] = w / sum;
        }
    }
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    PovmTrainingSet::new(rows.iter().map(|r| diagonal(r)).zip(weights).collect())
}

/// Random full-rank density matrix from a Haar basis and uniform weights.
pub fn random_density(n: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    Ok(random_mixed(n, rng)?.rho().clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    PovmPure,
    StatePure,
    StateMixed,
    ThermalTeacher,
}

#[derive(Debug, Clone)]
pub enum TargetPayload {
    Povm(PovmTrainingSet),
    State(StateTrainingSet),
}

/// A generated target with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct ExperimentTarget {
    pub kind: TargetKind,
    pub payload: TargetPayload,
    pub generator: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
}

/// Matrix as parallel arrays of real and imaginary parts, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexArray {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl ComplexArray {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        ComplexArray {
            real: rows(|z| z.re),
            imag: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.real.len();
        if self.imag.len() != n || self.real.iter().chain(&self.imag).any(|r| r.len() != n) {
            return Err(QbmError::Serialization(
                "real/imag arrays must be square and equal in shape".into(),
            ));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| c(self.real[i][j], self.imag[i][j])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDocument {
    pub generator: String,
    pub kind: TargetKind,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    /// The data state, or for POVM targets the first effect.
    pub state: ComplexArray,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub probabilities: Option<Vec<f64>>,
}

impl ExperimentTarget {
    pub fn step_function(n: usize, noise_p: f64, povm: bool) -> Result<Self> {
        let target = step_function_state(n, noise_p)?;
        let (kind, payload) = if povm {
            (TargetKind::PovmPure, TargetPayload::Povm(target.povm))
        } else {
            (TargetKind::StatePure, TargetPayload::State(target.state))
        };
        Ok(ExperimentTarget {
            kind,
            payload,
            generator: "step_function_state".into(),
            parameters: json!({ "n_visible": n, "noise_p": noise_p }),
            seed: None,
        })
    }

    pub fn haar_pure(n: usize, seed: u64) -> Result<Self> {
        Ok(ExperimentTarget {
            kind: TargetKind::StatePure,
            payload: TargetPayload::State(haar_random_pure(n, &mut RngStream::new(seed))?),
            generator: "haar_random_pure".into(),
            parameters: json!({ "n": n }),
            seed: Some(seed),
        })
    }

    pub fn mixed(n: usize, seed: u64) -> Result<Self> {
        Ok(ExperimentTarget {
            kind: TargetKind::StateMixed,
            payload: TargetPayload::State(random_mixed(n, &mut RngStream::new(seed))?),
            generator: "random_mixed".into(),
            parameters: json!({ "n": n }),
            seed: Some(seed),
        })
    }

    pub fn ti_teacher(n: usize, normalize: bool, seed: u64) -> Result<Self> {
        let teacher = random_ti_teacher(n, normalize, &mut RngStream::new(seed))?;
        Ok(ExperimentTarget {
            kind: TargetKind::ThermalTeacher,
            payload: TargetPayload::State(teacher.target),
            generator: "random_ti_teacher".into(),
            parameters: json!({ "n": n, "normalize": normalize, "theta": teacher.theta }),
            seed: Some(seed),
        })
    }

    pub fn to_document(&self) -> TargetDocument {
        let (state, probabilities) = match &self.payload {
            TargetPayload::State(s) => (ComplexArray::from_matrix(s.rho().matrix()), None),
            TargetPayload::Povm(p) => (
                ComplexArray::from_matrix(&p.elements()[0].effect),
                Some(p.elements().iter().map(|e| e.probability).collect()),
            ),
        };
        TargetDocument {
            generator: self.generator.clone(),
            kind: self.kind,
            parameters: self.parameters.clone(),
            seed: self.seed,
            state,
            probabilities,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }
}
