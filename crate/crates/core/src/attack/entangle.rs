//! The entangling eavesdropper: probe-coupling parameters, exact detection
//! probabilities and the information-leakage figure.
//!
//! Eve couples every in-flight particle to a private probe of dimension `d`
//! with an isometry fixed by four amplitudes and four unit probe vectors:
//!
//! ```text
//! |0>|e>  ->  alpha1 |0>|eps00> + beta1 |1>|eps01>
//! |1>|e>  ->  beta2  |0>|eps10> + alpha2 |1>|eps11>
//! ```
//!
//! Each decoy later measured in its preparation basis flips with a
//! probability determined entirely by these parameters, and the probe
//! states Eve keeps carry at most a trace-distance
//! `sqrt(1 - |<eps00|eps11>|^2)` worth of information about the carrier
//! bit. An attack that flips no decoy (all four detection probabilities
//! zero) forces the two retained probe states to coincide, so it learns
//! nothing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AttackError;
use crate::quantum::{vec_combine, ProbedQubit, SingleState, StateVector, NORM_TOLERANCE};
use crate::rng::RngStream;

/// Probe dimension used when nothing else is requested.
pub const DEFAULT_PROBE_DIM: usize = 4;

/// Validated parameters of the probe coupling.
///
/// Construction enforces `|alpha1|^2 + |beta1|^2 = 1` and
/// `|beta2|^2 + |alpha2|^2 = 1`, unit probe vectors of one common dimension,
/// and orthogonality of the two image vectors, so that the coupling extends
/// to a unitary on carrier and probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EveParamsDoc", into = "EveParamsDoc")]
pub struct EveUnitaryParams {
    alpha1: Complex64,
    beta1: Complex64,
    alpha2: Complex64,
    beta2: Complex64,
    eps00: StateVector,
    eps01: StateVector,
    eps10: StateVector,
    eps11: StateVector,
}

impl EveUnitaryParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha1: Complex64,
        beta1: Complex64,
        alpha2: Complex64,
        beta2: Complex64,
        eps00: StateVector,
        eps01: StateVector,
        eps10: StateVector,
        eps11: StateVector,
    ) -> Result<Self, AttackError> {
        let dim = eps00.dim();
        if dim == 0 {
            return Err(AttackError::ProbeDimensionMismatch);
        }
        for (label, eps) in [("eps01", &eps01), ("eps10", &eps10), ("eps11", &eps11)] {
            if eps.dim() != dim {
                let _ = label;
                return Err(AttackError::ProbeDimensionMismatch);
            }
        }
        for (label, eps) in [
            ("eps00", &eps00),
            ("eps01", &eps01),
            ("eps10", &eps10),
            ("eps11", &eps11),
        ] {
            let norm_sq = eps.norm_sq();
            if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
                return Err(AttackError::ProbeNotUnit { label, norm_sq });
            }
        }
        for (pair, a, b) in [(1u8, alpha1, beta1), (2u8, alpha2, beta2)] {
            let value = a.norm_sqr() + b.norm_sqr();
            if (value - 1.0).abs() > NORM_TOLERANCE {
                return Err(AttackError::AmplitudeNormalization { pair, value });
            }
        }
        // <image of |0>, image of |1>> must vanish for an isometry.
        let overlap = alpha1.conj() * beta2 * eps00.inner(&eps10).expect("dims checked")
            + beta1.conj() * alpha2 * eps01.inner(&eps11).expect("dims checked");
        if overlap.norm() > NORM_TOLERANCE {
            return Err(AttackError::NotIsometric { overlap: overlap.norm() });
        }
        Ok(Self { alpha1, beta1, alpha2, beta2, eps00, eps01, eps10, eps11 })
    }

    /// The coupling that leaves every carrier untouched.
    pub fn identity(probe_dim: usize) -> Self {
        let e0 = StateVector::basis_vector(probe_dim, 0);
        Self::new(
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ONE,
            Complex64::ZERO,
            e0.clone(),
            e0.clone(),
            e0.clone(),
            e0,
        )
        .expect("identity coupling is valid")
    }

    /// A Haar-style random isometric coupling, built by orthonormalizing two
    /// Gaussian vectors of the joint carrier/probe space.
    pub fn random(probe_dim: usize, rng: &mut RngStream) -> Self {
        assert!(probe_dim >= 1);
        loop {
            let w0 = match gaussian_vector(2 * probe_dim, rng).normalized() {
                Ok(v) => v,
                Err(_) => continue,
            };
            let raw = gaussian_vector(2 * probe_dim, rng);
            let overlap = w0.inner(&raw).expect("same dimension");
            let ortho = vec_combine(&[Complex64::ONE, -overlap], &[&raw, &w0]).expect("same dimension");
            let w1 = match ortho.normalized() {
                Ok(v) if ortho.norm() > 1e-6 => v,
                _ => continue,
            };
            let (u00, u01) = split_carrier(&w0, probe_dim);
            let (u10, u11) = split_carrier(&w1, probe_dim);
            let parts = [&u00, &u01, &u10, &u11];
            if parts.iter().any(|p| p.norm() < 1e-6) {
                continue;
            }
            let real = |x: f64| Complex64::new(x, 0.0);
            let params = Self::new(
                real(u00.norm()),
                real(u01.norm()),
                real(u11.norm()),
                real(u10.norm()),
                u00.normalized().expect("norm checked"),
                u01.normalized().expect("norm checked"),
                u10.normalized().expect("norm checked"),
                u11.normalized().expect("norm checked"),
            );
            match params {
                Ok(p) => return p,
                Err(_) => continue,
            }
        }
    }

    /// A random coupling from the zero-detection family: no flip amplitude
    /// and retained probe states equal up to the carrier-amplitude phases.
    pub fn random_undetectable(probe_dim: usize, rng: &mut RngStream) -> Self {
        assert!(probe_dim >= 1);
        let eps00 = loop {
            if let Ok(v) = gaussian_vector(probe_dim, rng).normalized() {
                break v;
            }
        };
        let unused = |rng: &mut RngStream| loop {
            if let Ok(v) = gaussian_vector(probe_dim, rng).normalized() {
                break v;
            }
        };
        let phase = |rng: &mut RngStream| {
            let theta = rng.unit_f64() * std::f64::consts::TAU;
            Complex64::new(theta.cos(), theta.sin())
        };
        let alpha1 = phase(rng);
        let alpha2 = phase(rng);
        let eps11 = eps00.scaled(alpha1 / alpha2);
        let eps01 = unused(rng);
        let eps10 = unused(rng);
        Self::new(alpha1, Complex64::ZERO, alpha2, Complex64::ZERO, eps00, eps01, eps10, eps11)
            .expect("zero-flip couplings are always isometric")
    }

    pub fn probe_dim(&self) -> usize {
        self.eps00.dim()
    }

    /// Entangles one prepared carrier with a fresh probe.
    pub fn apply_to(&self, state: SingleState) -> ProbedQubit {
        let [a0, a1] = state.amplitudes();
        let a0 = Complex64::new(a0, 0.0);
        let a1 = Complex64::new(a1, 0.0);
        let zero_branch = vec_combine(
            &[a0 * self.alpha1, a1 * self.beta2],
            &[&self.eps00, &self.eps10],
        )
        .expect("probe dimensions agree");
        let one_branch = vec_combine(
            &[a0 * self.beta1, a1 * self.alpha2],
            &[&self.eps01, &self.eps11],
        )
        .expect("probe dimensions agree");
        ProbedQubit::new(zero_branch, one_branch).expect("probe dimensions agree")
    }
}

/// Per-state probability that a decoy measured in its preparation basis
/// comes back flipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionProbabilities {
    pub z0: f64,
    pub z1: f64,
    pub x_plus: f64,
    pub x_minus: f64,
}

impl DetectionProbabilities {
    pub fn for_state(&self, state: SingleState) -> f64 {
        match state {
            SingleState::Z0 => self.z0,
            SingleState::Z1 => self.z1,
            SingleState::XPlus => self.x_plus,
            SingleState::XMinus => self.x_minus,
        }
    }

    pub fn max(&self) -> f64 {
        self.z0.max(self.z1).max(self.x_plus).max(self.x_minus)
    }

    /// Detection probability of one decoy drawn uniformly from the four
    /// states.
    pub fn uniform_mean(&self) -> f64 {
        (self.z0 + self.z1 + self.x_plus + self.x_minus) / 4.0
    }
}

/// Exact detection probability for each decoy state under the coupling.
pub fn entangle_measure_detection(p: &EveUnitaryParams) -> DetectionProbabilities {
    let quarter_norm = |coeffs: [Complex64; 4]| {
        vec_combine(&coeffs, &[&p.eps00, &p.eps10, &p.eps01, &p.eps11])
            .expect("probe dimensions agree")
            .norm_sq()
            / 4.0
    };
    DetectionProbabilities {
        z0: p.beta1.norm_sqr(),
        z1: p.beta2.norm_sqr(),
        // Prepared |+>, probability of reading |->.
        x_plus: quarter_norm([p.alpha1, p.beta2, -p.beta1, -p.alpha2]),
        // Prepared |->, probability of reading |+>.
        x_minus: quarter_norm([p.alpha1, -p.beta2, p.beta1, -p.alpha2]),
    }
}

/// Trace distance between the probe states Eve retains for an undisturbed
/// carrier |0> versus |1>: `sqrt(1 - |<eps00|eps11>|^2)`. Zero means the
/// attack cannot distinguish the two carrier bits.
pub fn entangle_measure_leakage(p: &EveUnitaryParams) -> Result<f64, AttackError> {
    for (which, amp) in [(1u8, p.alpha1), (2u8, p.alpha2)] {
        if amp.norm() <= f64::EPSILON {
            return Err(AttackError::DegenerateConditional { which });
        }
    }
    let u0 = p.eps00.scaled(p.alpha1).normalized().expect("alpha1 nonzero");
    let u1 = p.eps11.scaled(p.alpha2).normalized().expect("alpha2 nonzero");
    let overlap = u0.inner(&u1).expect("probe dimensions agree").norm();
    Ok((1.0 - overlap * overlap).max(0.0).sqrt())
}

/// On-disk form of [`EveUnitaryParams`]: complex numbers and probe
/// amplitudes as `[real, imag]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EveParamsDoc {
    pub alpha1: [f64; 2],
    pub beta1: [f64; 2],
    pub alpha2: [f64; 2],
    pub beta2: [f64; 2],
    pub eps00: Vec<[f64; 2]>,
    pub eps01: Vec<[f64; 2]>,
    pub eps10: Vec<[f64; 2]>,
    pub eps11: Vec<[f64; 2]>,
}

impl TryFrom<EveParamsDoc> for EveUnitaryParams {
    type Error = AttackError;

    fn try_from(doc: EveParamsDoc) -> Result<Self, AttackError> {
        let c = |[re, im]: [f64; 2]| Complex64::new(re, im);
        let v = |pairs: Vec<[f64; 2]>| {
            StateVector::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        };
        Self::new(
            c(doc.alpha1),
            c(doc.beta1),
            c(doc.alpha2),
            c(doc.beta2),
            v(doc.eps00),
            v(doc.eps01),
            v(doc.eps10),
            v(doc.eps11),
        )
    }
}

impl From<EveUnitaryParams> for EveParamsDoc {
    fn from(p: EveUnitaryParams) -> Self {
        let c = |z: Complex64| [z.re, z.im];
        let v = |s: &StateVector| s.amplitudes().iter().map(|a| [a.re, a.im]).collect();
        Self {
            alpha1: c(p.alpha1),
            beta1: c(p.beta1),
            alpha2: c(p.alpha2),
            beta2: c(p.beta2),
            eps00: v(&p.eps00),
            eps01: v(&p.eps01),
            eps10: v(&p.eps10),
            eps11: v(&p.eps11),
        }
    }
}

fn split_carrier(w: &StateVector, probe_dim: usize) -> (StateVector, StateVector) {
    let amps = w.amplitudes();
    (
        StateVector::new(amps[..probe_dim].to_vec()),
        StateVector::new(amps[probe_dim..].to_vec()),
    )
}

fn gaussian_vector(dim: usize, rng: &mut RngStream) -> StateVector {
    StateVector::new(
        (0..dim)
            .map(|_| {
                let (a, b) = gaussian_pair(rng);
                Complex64::new(a, b)
            })
            .collect(),
    )
}

fn gaussian_pair(rng: &mut RngStream) -> (f64, f64) {
    // Box-Muller; 1 - u keeps the log argument away from zero.
    let u = 1.0 - rng.unit_f64();
    let v = rng.unit_f64();
    let r = (-2.0 * u.ln()).sqrt();
    let theta = std::f64::consts::TAU * v;
    (r * theta.cos(), r * theta.sin())
}
