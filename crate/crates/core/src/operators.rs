//! Hamiltonian families as parameterized term lists.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
//! computational-basis index. Visible qubits come first, hidden qubits after.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::linalg::{add_scaled, c, hermitian_deviation, identity, kron, zeros, ComplexMatrix};

/// Off-diagonal magnitude above which a term counts as quantum.
pub const OFF_DIAGONAL_THRESHOLD: f64 = 1e-12;

/// Qubit count above which term matrices are not materialized.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        let entries = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        ComplexMatrix::from_row_slice(2, 2, &entries)
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(QbmError::InvalidArgument("empty Pauli string".into()));
        }
        Ok(PauliString(letters))
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = letter;
        PauliString(letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        pauli_matrix(self)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliString {
    type Err = QbmError;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(QbmError::InvalidArgument(format!("not a Pauli letter: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }
}

/// Dense matrix of a Pauli string.
pub fn pauli_matrix(s: &PauliString) -> ComplexMatrix {
    s.0.iter()
        .skip(1)
        .fold(s.0[0].matrix(), |acc, p| kron(&acc, &p.matrix()))
}

/// One Hamiltonian term `H_j`.
#[derive(Debug, Clone)]
pub struct Term {
    pub label: String,
    pub matrix: ComplexMatrix,
    /// Member of the off-diagonal (quantum) part of the Hamiltonian.
    pub is_quantum: bool,
}

impl Term {
    fn new(label: impl Into<String>, matrix: ComplexMatrix) -> Self {
        let is_quantum = has_off_diagonal(&matrix);
        Term {
            label: label.into(),
            matrix,
            is_quantum,
        }
    }
}

fn has_off_diagonal(m: &ComplexMatrix) -> bool {
    let n = m.nrows();
    (0..n).any(|j| (0..n).any(|i| i != j && m[(i, j)].norm() > OFF_DIAGONAL_THRESHOLD))
}

/// The Hamiltonian families a model can be built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelFamily {
    ClassicalBm { edges: Vec<(usize, usize)> },
    TransverseIsing,
    CompletePauli,
    MeanField,
    Fermionic,
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::ClassicalBm { .. } => "classical_bm",
            ModelFamily::TransverseIsing => "transverse_ising",
            ModelFamily::CompletePauli => "complete_pauli",
            ModelFamily::MeanField => "mean_field",
            ModelFamily::Fermionic => "fermionic",
        }
    }
}

/// `H(θ) = Σ_j θ_j H_j` over a fixed list of dense Hermitian terms.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    family: ModelFamily,
    n_visible: usize,
    n_hidden: usize,
    terms: Vec<Term>,
}

impl HamiltonianModel {
    fn from_terms(family: ModelFamily, n_visible: usize, n_hidden: usize, terms: Vec<Term>) -> Result<Self> {
        let dim = 1usize << (n_visible + n_hidden);
        for t in &terms {
            if t.matrix.nrows() != dim || t.matrix.ncols() != dim {
                return Err(QbmError::DimensionMismatch {
                    expected: dim,
                    found: t.matrix.nrows(),
                });
            }
            let dev = hermitian_deviation(&t.matrix);
            if dev > 1e-10 {
                return Err(QbmError::InvalidModel(format!(
                    "term {} is not Hermitian (deviation {dev:.3e})",
                    t.label
                )));
            }
        }
        Ok(HamiltonianModel {
            family,
            n_visible,
            n_hidden,
            terms,
        })
    }

    /// Rebuilds a model from its family and sizes.
    pub fn build(family: &ModelFamily, n_visible: usize, n_hidden: usize) -> Result<Self> {
        match family {
            ModelFamily::ClassicalBm { edges } => build_classical_bm(n_visible, n_hidden, edges),
            ModelFamily::Fermionic => build_fermionic_model(n_visible, n_hidden),
            other => {
                if n_hidden != 0 {
                    return Err(QbmError::InvalidModel(format!(
                        "{} models have no hidden units",
                        other.name()
                    )));
                }
                match other {
                    ModelFamily::TransverseIsing => build_transverse_ising_complete(n_visible),
                    ModelFamily::CompletePauli => build_complete_pauli_set(n_visible),
                    ModelFamily::MeanField => build_mean_field(n_visible),
                    _ => unreachable!(),
                }
            }
        }
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_qubits(&self) -> usize {
        self.n_visible + self.n_hidden
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn visible_dim(&self) -> usize {
        1 << self.n_visible
    }

    pub fn hidden_dim(&self) -> usize {
        1 << self.n_hidden
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn quantum_mask(&self) -> Vec<bool> {
        self.terms.iter().map(|t| t.is_quantum).collect()
    }

    /// `‖h_Q‖²`: squared norm of the parameters on quantum terms.
    pub fn quantum_norm_sqr(&self, theta: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(theta)
            .filter(|(t, _)| t.is_quantum)
            .map(|(_, x)| x * x)
            .sum()
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.terms.len() {
            return Err(QbmError::DimensionMismatch {
                expected: self.terms.len(),
                found: theta.len(),
            });
        }
        Ok(())
    }

    pub fn assemble(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        assemble_hamiltonian(self, theta)
    }

    pub fn descriptor(&self, theta: &[f64]) -> ModelDescriptor {
        ModelDescriptor {
            family: self.family.clone(),
            n_visible: self.n_visible,
            n_hidden: self.n_hidden,
            theta: theta.to_vec(),
        }
    }
}

/// Serializable checkpoint of a model and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    #[serde(flatten)]
    pub family: ModelFamily,
    pub n_visible: usize,
    pub n_hidden: usize,
    pub theta: Vec<f64>,
}

impl ModelDescriptor {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<(HamiltonianModel, Vec<f64>)> {
        let model = HamiltonianModel::build(&self.family, self.n_visible, self.n_hidden)?;
        model.check_theta(&self.theta)?;
        Ok((model, self.theta.clone()))
    }
}

/// `Σ_j θ_j H_j`.
pub fn assemble_hamiltonian(model: &HamiltonianModel, theta: &[f64]) -> Result<ComplexMatrix> {
    model.check_theta(theta)?;
    let mut h = zeros(model.dim());
    for (term, &x) in model.terms.iter().zip(theta) {
        if x != 0.0 {
            add_scaled(&mut h, x, &term.matrix);
        }
    }
    Ok(h)
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(QbmError::InvalidModel("model needs at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(QbmError::InvalidModel(format!(
            "{n} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Bit of qubit `q` in a basis index of an `n`-qubit register.
fn bit(index: usize, q: usize, n: usize) -> bool {
    (index >> (n - 1 - q)) & 1 == 1
}

fn diagonal_from<F: Fn(usize) -> f64>(n: usize, f: F) -> ComplexMatrix {
    let dim = 1 << n;
    let mut m = zeros(dim);
    for x in 0..dim {
        m[(x, x)] = c(f(x), 0.0);
    }
    m
}

/// `n̂_j = (I − Z_j)/2`.
pub fn number_operator(j: usize, n: usize) -> ComplexMatrix {
    diagonal_from(n, |x| if bit(x, j, n) { 1.0 } else { 0.0 })
}

/// Classical Boltzmann machine: a bias `n̂_j` per unit and a weight
/// `n̂_a n̂_b` per edge.
pub fn build_classical_bm(n_visible: usize, n_hidden: usize, edges: &[(usize, usize)]) -> Result<HamiltonianModel> {
    let n = n_visible + n_hidden;
    check_qubits(n)?;
    let mut seen = BTreeSet::new();
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(QbmError::InvalidModel(format!(
                "edge ({a},{b}) out of range for {n} units"
            )));
        }
        if a == b {
            return Err(QbmError::InvalidModel(format!("self-loop on unit {a}")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(QbmError::InvalidModel(format!("duplicate edge ({a},{b})")));
        }
    }
    let mut terms: Vec<Term> = (0..n)
        .map(|j| Term::new(format!("n{j}"), number_operator(j, n)))
        .collect();
    for &(a, b) in edges {
        terms.push(Term::new(
            format!("n{a}n{b}"),
            diagonal_from(n, |x| if bit(x, a, n) && bit(x, b, n) { 1.0 } else { 0.0 }),
        ));
    }
    HamiltonianModel::from_terms(
        ModelFamily::ClassicalBm { edges: edges.to_vec() },
        n_visible,
        n_hidden,
        terms,
    )
}

/// All unordered pairs `(i, j)`, `i < j`, lexicographic.
pub fn complete_graph(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `Σ α_j Z_j + Σ β_j X_j + Σ_{i<j} γ_ij Z_i Z_j` on the complete graph.
pub fn build_transverse_ising_complete(n: usize) -> Result<HamiltonianModel> {
    check_qubits(n)?;
    let mut terms = Vec::with_capacity(2 * n + n * (n - 1) / 2);
    for letter in [Pauli::Z, Pauli::X] {
        for j in 0..n {
            let s = PauliString::single(n, j, letter);
            terms.push(Term::new(format!("{}{j}", letter.symbol()), s.matrix()));
        }
    }
    for (i, j) in complete_graph(n) {
        let mut letters = vec![Pauli::I; n];
        letters[i] = Pauli::Z;
        letters[j] = Pauli::Z;
        terms.push(Term::new(format!("Z{i}Z{j}"), PauliString(letters).matrix()));
    }
    HamiltonianModel::from_terms(ModelFamily::TransverseIsing, n, 0, terms)
}

/// Every non-identity Pauli string on `n` qubits, lexicographic in `I<X<Y<Z`.
pub fn all_pauli_strings(n: usize) -> Vec<PauliString> {
    let mut out = Vec::with_capacity((1 << (2 * n)) - 1);
    for code in 1..(1usize << (2 * n)) {
        let letters = (0..n).map(|q| Pauli::ALL[(code >> (2 * (n - 1 - q))) & 3]).collect();
        out.push(PauliString(letters));
    }
    out
}

/// Largest register the complete Pauli family is built for.
pub const MAX_COMPLETE_PAULI_QUBITS: usize = 6;

pub fn build_complete_pauli_set(n: usize) -> Result<HamiltonianModel> {
    check_qubits(n)?;
    if n > MAX_COMPLETE_PAULI_QUBITS {
        return Err(QbmError::InvalidModel(format!(
            "complete Pauli set is capped at {MAX_COMPLETE_PAULI_QUBITS} qubits"
        )));
    }
    let terms = all_pauli_strings(n)
        .into_iter()
        .map(|s| Term::new(s.to_string(), s.matrix()))
        .collect();
    HamiltonianModel::from_terms(ModelFamily::CompletePauli, n, 0, terms)
}

/// `Σ_j (α_j Z_j + β_j X_j + γ_j Y_j)`; terms ordered `X_j, Y_j, Z_j` per qubit.
pub fn build_mean_field(n: usize) -> Result<HamiltonianModel> {
    check_qubits(n)?;
    let mut terms = Vec::with_capacity(3 * n);
    for j in 0..n {
        for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
            let s = PauliString::single(n, j, letter);
            terms.push(Term::new(format!("{}{j}", letter.symbol()), s.matrix()));
        }
    }
    HamiltonianModel::from_terms(ModelFamily::MeanField, n, 0, terms)
}

/// Jordan-Wigner annihilator `a_p = Z^{⊗p} ⊗ (X+iY)/2 ⊗ I^{⊗(n−p−1)}`.
pub fn jordan_wigner_annihilator(p: usize, n: usize) -> Result<ComplexMatrix> {
    if p >= n {
        return Err(QbmError::InvalidArgument(format!(
            "mode {p} out of range for {n} modes"
        )));
    }
    let lowering = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    let z = Pauli::Z.matrix();
    let mut m = identity(1);
    for q in 0..n {
        let factor = if q < p {
            &z
        } else if q == p {
            &lowering
        } else {
            &Pauli::I.matrix()
        };
        m = kron(&m, factor);
    }
    Ok(m)
}

/// A single creation or annihilation operator on one mode.
#[derive(Debug, Clone, Copy)]
struct Ladder {
    mode: usize,
    create: bool,
}

fn create(mode: usize) -> Ladder {
    Ladder { mode, create: true }
}

fn annihilate(mode: usize) -> Ladder {
    Ladder { mode, create: false }
}

/// Applies `ops` right to left to basis state `x`; `None` if annihilated.
fn apply_ladders(ops: &[Ladder], mut x: usize, n: usize) -> Option<(usize, f64)> {
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let mask = 1usize << (n - 1 - op.mode);
        let occupied = x & mask != 0;
        if occupied == op.create {
            return None;
        }
        // Jordan-Wigner string: parity of occupied modes before `mode`
        let before = x >> (n - op.mode);
        if before.count_ones() % 2 == 1 {
            sign = -sign;
        }
        x ^= mask;
    }
    Some((x, sign))
}

/// Dense matrix of a product of ladder operators plus its Hermitian conjugate.
fn ladder_term_plus_hc(ops: &[Ladder], n: usize) -> ComplexMatrix {
    let dim = 1 << n;
    let mut m = zeros(dim);
    for x in 0..dim {
        if let Some((y, s)) = apply_ladders(ops, x, n) {
            m[(y, x)] += c(s, 0.0);
            m[(x, y)] += c(s, 0.0);
        }
    }
    m
}

/// Fermionic model `H_p + H_pq + H_pqrs` under Jordan-Wigner.
///
/// Term order: one-mode terms `a_p + a_p†`; hopping `a_p†a_q + a_q†a_p` for
/// `p ≤ q` (`p = q` gives `n_p`); interactions `a_p†a_q†a_r a_s + h.c.` for
/// `p<q`, `r<s`, `(p,q) ≤ (r,s)`, where the diagonal pair `(p,q) = (r,s)`
/// gives `n_p n_q`.
pub fn build_fermionic_model(n_visible: usize, n_hidden: usize) -> Result<HamiltonianModel> {
    let n = n_visible + n_hidden;
    check_qubits(n)?;
    if n < 2 {
        return Err(QbmError::InvalidModel(
            "Fermionic model needs at least two modes".into(),
        ));
    }
    let mut terms = Vec::new();
    for p in 0..n {
        terms.push(Term::new(
            format!("a{p}+a{p}^"),
            ladder_term_plus_hc(&[annihilate(p)], n),
        ));
    }
    for p in 0..n {
        for q in p..n {
            if p == q {
                terms.push(Term::new(format!("n{p}"), number_operator(p, n)));
            } else {
                terms.push(Term::new(
                    format!("a{p}^a{q}+h.c."),
                    ladder_term_plus_hc(&[create(p), annihilate(q)], n),
                ));
            }
        }
    }
    let pairs = complete_graph(n);
    for (i, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[i..] {
            if (p, q) == (r, s) {
                terms.push(Term::new(
                    format!("n{p}n{q}"),
                    diagonal_from(n, |x| if bit(x, p, n) && bit(x, q, n) { 1.0 } else { 0.0 }),
                ));
            } else {
                terms.push(Term::new(
                    format!("a{p}^a{q}^a{r}a{s}+h.c."),
                    ladder_term_plus_hc(&[create(p), create(q), annihilate(r), annihilate(s)], n),
                ));
            }
        }
    }
    HamiltonianModel::from_terms(ModelFamily::Fermionic, n_visible, n_hidden, terms)
}

/// Term count of the Fermionic model on `n` modes.
pub fn fermionic_term_count(n: usize) -> usize {
    let pairs = n * (n - 1) / 2;
    n + n * (n + 1) / 2 + pairs * (pairs + 1) / 2
}
