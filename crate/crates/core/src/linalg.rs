//! Dense Hermitian linear algebra.
//!
//! Everything here works on [`ComplexMatrix`] values in the computational
//! basis. Matrix functions (`exp`, `log`) go through a full Hermitian
//! eigendecomposition, which at the sizes this crate targets (dimension at
//! most 4096) is both the simplest and the most accurate route.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QbmError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative tolerance below which an input is silently Hermitized.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

/// Gap below which the divided difference of `exp(-x)` switches to the
/// midpoint derivative.
pub const DIVIDED_DIFFERENCE_GAP: f64 = 1e-8;

/// Smallest eigenvalue a reference state may have in [`relative_entropy`].
pub const MIN_REFERENCE_EIGENVALUE: f64 = 1e-14;

/// Default eigenvalue clip used by [`matrix_log_psd`].
pub const DEFAULT_LOG_CLIP: f64 = 1e-10;

const DENSITY_TOLERANCE: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(dim, dim)
}

pub fn diagonal(values: &[f64]) -> ComplexMatrix {
    let mut m = zeros(values.len());
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// Tensor product, `a` acting on the leftmost factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.shape(), b.transpose().shape());
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `Re Tr[A B]` for Hermitian `b`, using `B_ji = conj(B_ij)`.
pub fn trace_product_hermitian(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// `acc += alpha · m`.
pub fn add_scaled(acc: &mut ComplexMatrix, alpha: f64, m: &ComplexMatrix) {
    acc.zip_apply(m, |a, b| *a += b * alpha);
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.trace()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn ensure_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(QbmError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub fn ensure_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let n = ensure_square(a)?;
    let m = ensure_square(b)?;
    if n != m {
        return Err(QbmError::DimensionMismatch { expected: n, found: m });
    }
    Ok(n)
}

/// Largest entry of `|A - A†|`.
pub fn hermitian_deviation(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A†)/2`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Hermitizes `a` if it is Hermitian up to `HERMITIAN_TOLERANCE * ||a||_F`.
pub fn checked_hermitize(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a)?;
    let tolerance = HERMITIAN_TOLERANCE * frobenius_norm(a);
    let deviation = hermitian_deviation(a);
    if deviation > tolerance {
        return Err(QbmError::NotHermitian { deviation, tolerance });
    }
    Ok(hermitize(a))
}

/// Spectral data of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Largest absolute eigenvalue, i.e. the spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// `V† A V`.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// `V A V†`.
    pub fn from_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.with_spectrum(&weights)
    }

    /// `V diag(w) V†` for an arbitrary real spectrum.
    pub fn with_spectrum(&self, weights: &[f64]) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &w) in weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        hermitize(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.with_spectrum(&self.eigenvalues)
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Inputs within `1e-8 ||A||` of Hermitian are symmetrized first; anything
/// further off is rejected.
pub fn hermitian_eigendecompose(a: &ComplexMatrix) -> Result<EigenSystem> {
    let h = checked_hermitize(a)?;
    let dim = h.nrows();
    if dim == 0 {
        return Err(QbmError::InvalidArgument("empty matrix".into()));
    }
    let eig = h.try_symmetric_eigen(f64::EPSILON, 0).ok_or(QbmError::EigenFailed)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = zeros(dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Spectral norm of a Hermitian matrix.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigendecompose(a)?.spectral_norm())
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates the density-operator invariants (tolerance `1e-10`).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > DENSITY_TOLERANCE {
            return Err(QbmError::NotHermitian {
                deviation,
                tolerance: DENSITY_TOLERANCE,
            });
        }
        let matrix = hermitize(&matrix);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > DENSITY_TOLERANCE {
            return Err(QbmError::InvalidTrace(tr));
        }
        let min = hermitian_eigendecompose(&matrix)?.min_eigenvalue();
        if min < -DENSITY_TOLERANCE {
            return Err(QbmError::NotPositive(min));
        }
        Ok(DensityMatrix(matrix))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(identity(dim).unscale(dim as f64))
    }

    /// `|ψ⟩⟨ψ|` for a nonzero vector, normalized.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QbmError::InvalidArgument("state vector has zero norm".into()));
        }
        let psi = psi.unscale(norm);
        Ok(DensityMatrix(&psi * psi.adjoint()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.0, &self.0).re
    }

    /// `Tr[ρ A]` for Hermitian `A`.
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        trace_product_hermitian(&self.0, observable)
    }

    /// `Tr[ρσ]`.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        trace_product_hermitian(&self.0, &other.0)
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(kron(&self.0, &other.0))
    }

    /// `-Tr ρ log ρ` in nats.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let eig = hermitian_eigendecompose(&self.0)?;
        Ok(-eig
            .eigenvalues
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>())
    }
}

/// Thermal state at unit inverse temperature together with its spectrum.
#[derive(Debug, Clone)]
pub struct Gibbs {
    pub eigen: EigenSystem,
    /// Boltzmann weights `e^{-λ_i}/Z`, aligned with `eigen.eigenvalues`.
    pub probabilities: Vec<f64>,
    pub log_partition: f64,
    pub state: DensityMatrix,
}

impl Gibbs {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(Self::from_eigen(hermitian_eigendecompose(h)?))
    }

    pub fn from_eigen(eigen: EigenSystem) -> Self {
        let shift = eigen.min_eigenvalue();
        let weights: Vec<f64> = eigen.eigenvalues.iter().map(|&x| (-(x - shift)).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let log_partition = -shift + total.ln();
        let state = DensityMatrix(eigen.with_spectrum(&probabilities));
        Gibbs {
            eigen,
            probabilities,
            log_partition,
            state,
        }
    }

    /// `Tr[e^{-H} A] / Tr[e^{-H}]`.
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        self.state.expectation(observable)
    }
}

/// `e^{-H}/Tr[e^{-H}]` and `log Tr[e^{-H}]`.
///
/// The spectrum is shifted by its minimum before exponentiating, so the
/// largest Boltzmann weight is exactly one and nothing overflows.
pub fn gibbs_state(h: &ComplexMatrix) -> Result<(DensityMatrix, f64)> {
    let g = Gibbs::new(h)?;
    Ok((g.state, g.log_partition))
}

/// Replaces eigenvalues below `clip` by `clip`.
pub fn clip_psd(a: &ComplexMatrix, clip: f64) -> Result<ComplexMatrix> {
    Ok(clipped_eigen(a, clip)?.reconstruct())
}

fn clipped_eigen(a: &ComplexMatrix, clip: f64) -> Result<EigenSystem> {
    if !(clip > 0.0) {
        return Err(QbmError::InvalidArgument(format!("clip must be positive, got {clip}")));
    }
    let mut eig = hermitian_eigendecompose(a)?;
    if eig.min_eigenvalue() < -1e-8 {
        return Err(QbmError::NotPositive(eig.min_eigenvalue()));
    }
    for x in eig.eigenvalues.iter_mut() {
        *x = x.max(clip);
    }
    Ok(eig)
}

/// Matrix logarithm of a PSD matrix, with eigenvalues below `clip` raised to
/// `clip` first.
pub fn matrix_log_psd(a: &ComplexMatrix, clip: f64) -> Result<ComplexMatrix> {
    Ok(clipped_eigen(a, clip)?.map(f64::ln))
}

/// Divided difference of `f(x) = e^{-x}` at `(a, b)`.
pub fn divided_difference_exp_neg(a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if (a - b).abs() > DIVIDED_DIFFERENCE_GAP {
        // (e^{-a} - e^{-b})/(a - b) = -e^{-mid} sinh(δ)/δ with δ = (a-b)/2
        let half = 0.5 * (a - b);
        -(-mid).exp() * half.sinh() / half
    } else {
        -(-mid).exp()
    }
}

/// Directional derivative of `e^{-(H - shift)}` along `e`, in the eigenbasis
/// of `H`: `(V† E V)_{ij} f[λ_i, λ_j]`, rotated back.
pub fn frechet_exp_neg_eigen(eig: &EigenSystem, e: &ComplexMatrix, shift: f64) -> ComplexMatrix {
    let mut rotated = eig.to_eigenbasis(e);
    hadamard_divided_differences(&mut rotated, &eig.eigenvalues, shift);
    eig.from_eigenbasis(&rotated)
}

/// Multiplies entry `(i, j)` by `f[λ_i - shift, λ_j - shift]` in place.
pub fn hadamard_divided_differences(m: &mut ComplexMatrix, eigenvalues: &[f64], shift: f64) {
    let n = eigenvalues.len();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= divided_difference_exp_neg(eigenvalues[i] - shift, eigenvalues[j] - shift);
        }
    }
}

/// `D[e^{-H}](E) = -∫₀¹ e^{-sH} E e^{-(1-s)H} ds`.
pub fn frechet_exp_neg(h: &ComplexMatrix, e: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_same_dim(h, e)?;
    let eig = hermitian_eigendecompose(h)?;
    Ok(frechet_exp_neg_eigen(&eig, e, 0.0))
}

/// `S(ρ‖σ) = Tr ρ(log ρ − log σ)` in nats, with `0 log 0 = 0`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_same_dim(rho.matrix(), sigma.matrix())?;
    let sigma_eig = hermitian_eigendecompose(sigma.matrix())?;
    if sigma_eig.min_eigenvalue() < MIN_REFERENCE_EIGENVALUE {
        return Err(QbmError::SingularReference(sigma_eig.min_eigenvalue()));
    }
    let log_sigma = sigma_eig.map(f64::ln);
    let neg_entropy = -rho.von_neumann_entropy()?;
    Ok(neg_entropy - rho.expectation(&log_sigma))
}

/// Distance measure between two states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    /// `½ Σ |μ_i|` over the spectrum of `ρ − σ`.
    Trace,
    /// `‖ρ − σ‖_F`.
    Frobenius,
}

pub fn distance(rho: &DensityMatrix, sigma: &DensityMatrix, kind: DistanceKind) -> Result<f64> {
    ensure_same_dim(rho.matrix(), sigma.matrix())?;
    let diff = rho.matrix() - sigma.matrix();
    match kind {
        DistanceKind::Frobenius => Ok(frobenius_norm(&diff)),
        DistanceKind::Trace => {
            let eig = hermitian_eigendecompose(&diff)?;
            Ok(0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
        }
    }
}
