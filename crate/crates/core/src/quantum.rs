//! Single-particle states, Bell-basis measurement statistics and the small
//! complex-vector algebra used by the probe-coupling analysis.
//!
//! The protocol only ever prepares the four states |0>, |1>, |+>, |-> and
//! measures particle pairs in the Bell basis. For any product of two such
//! states every Bell outcome has probability 0, 1/4 or 1/2, so the
//! distributions are tabulated exactly in units of 1/4 and sampling an
//! honest measurement never touches floating point: same-basis pairs put
//! weight 1/2 on exactly two outcomes, mixed-basis pairs are uniform over
//! all four.
//!
//! Floating point appears only in [`StateVector`], the carrier for the
//! probe-state algebra of an entangling eavesdropper, and in measurements of
//! a [`ProbedQubit`], whose branch norms are genuinely irrational.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RngStream;

/// Tolerance used for every unit-norm and orthogonality validation.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Measurement basis for a single particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Computational basis {|0>, |1>}.
    Z,
    /// Diagonal basis {|+>, |->}.
    X,
}

/// One of the four single-particle states the preparers use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingleState {
    /// |0>
    Z0,
    /// |1>
    Z1,
    /// |+> = (|0> + |1>)/sqrt(2)
    XPlus,
    /// |-> = (|0> - |1>)/sqrt(2)
    XMinus,
}

impl SingleState {
    /// All four states, in a fixed order.
    pub const ALL: [SingleState; 4] = [
        SingleState::Z0,
        SingleState::Z1,
        SingleState::XPlus,
        SingleState::XMinus,
    ];

    /// The basis this state belongs to.
    pub fn basis(self) -> Basis {
        match self {
            SingleState::Z0 | SingleState::Z1 => Basis::Z,
            SingleState::XPlus | SingleState::XMinus => Basis::X,
        }
    }

    /// The classical bit this state encodes within its own basis
    /// (0 for |0> and |+>, 1 for |1> and |->).
    pub fn bit(self) -> u8 {
        match self {
            SingleState::Z0 | SingleState::XPlus => 0,
            SingleState::Z1 | SingleState::XMinus => 1,
        }
    }

    /// The state encoding `bit` in `basis`.
    pub fn from_basis_bit(basis: Basis, bit: u8) -> Self {
        debug_assert!(bit < 2);
        match (basis, bit) {
            (Basis::Z, 0) => SingleState::Z0,
            (Basis::Z, _) => SingleState::Z1,
            (Basis::X, 0) => SingleState::XPlus,
            (Basis::X, _) => SingleState::XMinus,
        }
    }

    /// Real amplitudes in the computational basis.
    pub fn amplitudes(self) -> [f64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            SingleState::Z0 => [1.0, 0.0],
            SingleState::Z1 => [0.0, 1.0],
            SingleState::XPlus => [r, r],
            SingleState::XMinus => [r, -r],
        }
    }
}

/// Outcome of a Bell-basis measurement on a particle pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellOutcome {
    /// (|00> + |11>)/sqrt(2)
    PhiPlus,
    /// (|00> - |11>)/sqrt(2)
    PhiMinus,
    /// (|01> + |10>)/sqrt(2)
    PsiPlus,
    /// (|01> - |10>)/sqrt(2)
    PsiMinus,
}

impl BellOutcome {
    /// All four outcomes, in the order used by [`BellDistribution`].
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    fn index(self) -> usize {
        match self {
            BellOutcome::PhiPlus => 0,
            BellOutcome::PhiMinus => 1,
            BellOutcome::PsiPlus => 2,
            BellOutcome::PsiMinus => 3,
        }
    }
}

/// Exact Bell-outcome distribution of a two-particle product state, stored
/// in units of 1/4 (the weights always sum to 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BellDistribution {
    quarters: [u8; 4],
}

impl BellDistribution {
    /// Probability weight of `outcome` in units of 1/4.
    pub fn quarters(self, outcome: BellOutcome) -> u8 {
        self.quarters[outcome.index()]
    }

    /// Probability of `outcome`.
    pub fn probability(self, outcome: BellOutcome) -> f64 {
        f64::from(self.quarters(outcome)) / 4.0
    }

    /// Whether `outcome` can occur at all.
    pub fn is_possible(self, outcome: BellOutcome) -> bool {
        self.quarters(outcome) > 0
    }

    /// Outcomes with nonzero probability.
    pub fn support(self) -> impl Iterator<Item = BellOutcome> {
        BellOutcome::ALL
            .into_iter()
            .filter(move |o| self.is_possible(*o))
    }
}

/// Exact Bell-outcome distribution for measuring the product `s1 (x) s2`.
pub fn bell_decompose(s1: SingleState, s2: SingleState) -> BellDistribution {
    let quarters = if s1.basis() != s2.basis() {
        // Mixed-basis products overlap every Bell state equally.
        [1, 1, 1, 1]
    } else {
        match (s1.basis(), s1.bit() == s2.bit()) {
            (Basis::Z, true) => [2, 2, 0, 0],  // |00>, |11>
            (Basis::Z, false) => [0, 0, 2, 2], // |01>, |10>
            (Basis::X, true) => [2, 0, 2, 0],  // |++>, |-->
            (Basis::X, false) => [0, 2, 0, 2], // |+->, |-+>
        }
    };
    BellDistribution { quarters }
}

/// Samples one Bell measurement of the product `s1 (x) s2`, advancing the
/// stream by a single draw.
pub fn bell_measure(s1: SingleState, s2: SingleState, rng: &mut RngStream) -> BellOutcome {
    let dist = bell_decompose(s1, s2);
    let mut q = rng.quarter();
    for outcome in BellOutcome::ALL {
        let w = dist.quarters(outcome);
        if q < w {
            return outcome;
        }
        q -= w;
    }
    unreachable!("quarter weights sum to 4");
}

/// Projectively measures `state` in `basis`, returning the observed bit and
/// the post-measurement state. Measuring in the preparation basis is
/// deterministic and consumes no randomness; the conjugate basis costs one
/// uniform bit.
pub fn projective_measure(state: SingleState, basis: Basis, rng: &mut RngStream) -> (u8, SingleState) {
    if state.basis() == basis {
        (state.bit(), state)
    } else {
        let bit = rng.bit();
        (bit, SingleState::from_basis_bit(basis, bit))
    }
}

/// Errors from the vector algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("got {coefficients} coefficients for {vectors} vectors")]
    CoefficientCount { coefficients: usize, vectors: usize },
    #[error("cannot combine an empty set of vectors")]
    EmptyCombination,
    #[error("vector dimensions disagree: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("squared norm {norm_sq} is not within {NORM_TOLERANCE} of 1")]
    NotUnitNorm { norm_sq: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroNorm,
}

/// A finite-dimensional complex amplitude vector.
///
/// Not forced to unit norm: linear combinations of probe states are
/// legitimately unnormalized. Use [`StateVector::unit`] where a physical
/// state is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes without any norm requirement.
    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    /// Wraps amplitudes that must already be unit norm (within
    /// [`NORM_TOLERANCE`] on the squared norm).
    pub fn unit(amps: Vec<Complex64>) -> Result<Self, QuantumError> {
        let v = Self::new(amps);
        if (v.norm_sq() - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotUnitNorm { norm_sq: v.norm_sq() });
        }
        Ok(v)
    }

    /// A vector with the given real amplitudes.
    pub fn from_real(xs: &[f64]) -> Self {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The `dim`-dimensional basis vector `e_index`.
    pub fn basis_vector(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Hermitian inner product `<self|other>` (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<Complex64, QuantumError> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// This vector scaled by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(self.amps.iter().map(|a| a * factor).collect())
    }

    /// The unit vector pointing along this one.
    pub fn normalized(&self) -> Result<Self, QuantumError> {
        let n = self.norm();
        if n <= f64::EPSILON {
            return Err(QuantumError::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Kronecker product `self (x) other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self::new(amps)
    }
}

impl TryFrom<Vec<[f64; 2]>> for StateVector {
    type Error = String;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self, String> {
        if pairs.is_empty() {
            return Err("a state vector needs at least one amplitude".into());
        }
        Ok(Self::new(
            pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

impl From<StateVector> for Vec<[f64; 2]> {
    fn from(v: StateVector) -> Self {
        v.amps.into_iter().map(|a| [a.re, a.im]).collect()
    }
}

/// Computational-basis amplitude vector of a prepared state.
pub fn state_vector_of(state: SingleState) -> StateVector {
    StateVector::from_real(&state.amplitudes())
}

/// The linear combination `sum_i coeffs[i] * vectors[i]`, left unnormalized.
pub fn vec_combine(coeffs: &[Complex64], vectors: &[&StateVector]) -> Result<StateVector, QuantumError> {
    if coeffs.len() != vectors.len() {
        return Err(QuantumError::CoefficientCount {
            coefficients: coeffs.len(),
            vectors: vectors.len(),
        });
    }
    let first = vectors.first().ok_or(QuantumError::EmptyCombination)?;
    let dim = first.dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(QuantumError::DimensionMismatch {
                left: dim,
                right: v.dim(),
            });
        }
    }
    let mut amps = vec![Complex64::ZERO; dim];
    for (c, v) in coeffs.iter().zip(vectors) {
        for (acc, a) in amps.iter_mut().zip(v.amplitudes()) {
            *acc += c * a;
        }
    }
    Ok(StateVector::new(amps))
}

/// A transmitted qubit entangled with an eavesdropper probe: the joint pure
/// state `|0> (x) zero_branch + |1> (x) one_branch`. The branches live in the
/// probe space and are unnormalized; for an isometric coupling their squared
/// norms sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbedQubit {
    zero_branch: StateVector,
    one_branch: StateVector,
}

impl ProbedQubit {
    pub fn new(zero_branch: StateVector, one_branch: StateVector) -> Result<Self, QuantumError> {
        if zero_branch.dim() != one_branch.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: zero_branch.dim(),
                right: one_branch.dim(),
            });
        }
        Ok(Self { zero_branch, one_branch })
    }

    pub fn probe_dim(&self) -> usize {
        self.zero_branch.dim()
    }

    /// Probe branch attached to carrier bit `bit`.
    pub fn branch(&self, bit: u8) -> &StateVector {
        if bit == 0 { &self.zero_branch } else { &self.one_branch }
    }

    /// Probabilities of reading bit 0 / bit 1 when the carrier is measured
    /// in `basis`.
    pub fn bit_probabilities(&self, basis: Basis) -> [f64; 2] {
        let (p0, p1) = match basis {
            Basis::Z => (self.zero_branch.norm_sq(), self.one_branch.norm_sq()),
            Basis::X => {
                let one = Complex64::ONE;
                let plus = vec_combine(&[one, one], &[&self.zero_branch, &self.one_branch])
                    .expect("branches share a dimension");
                let minus = vec_combine(&[one, -one], &[&self.zero_branch, &self.one_branch])
                    .expect("branches share a dimension");
                (plus.norm_sq() / 2.0, minus.norm_sq() / 2.0)
            }
        };
        let total = p0 + p1;
        [p0 / total, p1 / total]
    }
}

/// A particle in flight from a preparer to Alice: the prepared pure state,
/// or a carrier an adversary has entangled with a probe.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelParticle {
    Pure(SingleState),
    Probed(ProbedQubit),
}

impl ChannelParticle {
    /// Measures the carrier in `basis`, returning the observed bit.
    pub fn measure_in(&self, basis: Basis, rng: &mut RngStream) -> u8 {
        match self {
            ChannelParticle::Pure(s) => projective_measure(*s, basis, rng).0,
            ChannelParticle::Probed(p) => {
                let [_, p1] = p.bit_probabilities(basis);
                u8::from(rng.unit_f64() < p1)
            }
        }
    }
}

/// Exact Bell-outcome probabilities for a joint measurement of two in-flight
/// particles, indexed in [`BellOutcome::ALL`] order.
pub fn bell_pair_distribution(first: &ChannelParticle, second: &ChannelParticle) -> [f64; 4] {
    use ChannelParticle::{Probed, Pure};
    match (first, second) {
        (Pure(a), Pure(b)) => {
            let dist = bell_decompose(*a, *b);
            BellOutcome::ALL.map(|o| dist.probability(o))
        }
        // The Bell states are (anti)symmetric under swapping the two
        // particles, so the outcome distribution does not depend on which
        // side carries the probe.
        (Probed(p), Pure(s)) | (Pure(s), Probed(p)) => {
            let [w0, w1] = s.amplitudes();
            let f0 = p.branch(0);
            let f1 = p.branch(1);
            let comb = |c0: f64, c1: f64| {
                vec_combine(&[Complex64::new(c0, 0.0), Complex64::new(c1, 0.0)], &[f0, f1])
                    .expect("branches share a dimension")
                    .norm_sq()
                    / 2.0
            };
            normalize4([
                comb(w0, w1),  // phi+
                comb(w0, -w1), // phi-
                comb(w1, w0),  // psi+
                comb(w1, -w0), // psi-
            ])
        }
        (Probed(a), Probed(b)) => {
            let joint = |i: u8, j: u8| a.branch(i).tensor(b.branch(j));
            let f00 = joint(0, 0);
            let f01 = joint(0, 1);
            let f10 = joint(1, 0);
            let f11 = joint(1, 1);
            let one = Complex64::ONE;
            let comb = |u: &StateVector, v: &StateVector, sign: f64| {
                vec_combine(&[one, Complex64::new(sign, 0.0)], &[u, v])
                    .expect("tensor branches share a dimension")
                    .norm_sq()
                    / 2.0
            };
            normalize4([
                comb(&f00, &f11, 1.0),  // phi+
                comb(&f00, &f11, -1.0), // phi-
                comb(&f01, &f10, 1.0),  // psi+
                comb(&f01, &f10, -1.0), // psi-
            ])
        }
    }
}

/// Samples a Bell measurement of two in-flight particles.
pub fn bell_measure_pair(
    first: &ChannelParticle,
    second: &ChannelParticle,
    rng: &mut RngStream,
) -> BellOutcome {
    if let (ChannelParticle::Pure(a), ChannelParticle::Pure(b)) = (first, second) {
        return bell_measure(*a, *b, rng);
    }
    let probs = bell_pair_distribution(first, second);
    let mut u = rng.unit_f64();
    for (outcome, p) in BellOutcome::ALL.into_iter().zip(probs) {
        if u < p {
            return outcome;
        }
        u -= p;
    }
    BellOutcome::PsiMinus
}

fn normalize4(mut probs: [f64; 4]) -> [f64; 4] {
    let total: f64 = probs.iter().sum();
    debug_assert!(total > 0.0, "degenerate joint state");
    for p in &mut probs {
        *p /= total;
    }
    probs
}
