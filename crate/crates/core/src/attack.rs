//! Adversary models.
//!
//! Three outside-eavesdropper channel attacks (measure-resend,
//! intercept-resend and the entangling probe of [`entangle`]), two dishonest
//! measurer behaviors (publishing fabricated announcements, flooding every
//! pair into the message set) and one dishonest participant (Bob raiding
//! the other preparer's channel). Every attack receives only data its model
//! grants the attacker: an outside eavesdropper sees the interleaved
//! sequence without any decoy positions or bases, and Bob additionally
//! knows his own preparation bases.
//!
//! A strategy transforms particles in flight or replaces the measurer's
//! announcements; the protocol engine applies at most one strategy per run.

pub mod entangle;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use thiserror::Error;

use crate::protocol::{Announcement, DirectOutcome};
use crate::quantum::{projective_measure, Basis, SingleState};
use crate::rng::RngStream;
use entangle::EveUnitaryParams;

/// Discriminant of an attack strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    None,
    MeasureResend,
    InterceptResend,
    EntangleMeasure,
    AliceFakePublish,
    AliceFloodSummation,
    BobInterceptCharlie,
}

/// Which preparer-to-measurer channel an eavesdropper sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelTarget {
    BobToAlice,
    CharlieToAlice,
}

/// A complete adversary configuration for one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// Honest run.
    None,
    /// Eve measures every particle of the targeted sequence in the
    /// computational basis and forwards the collapsed states.
    MeasureResend { channel: ChannelTarget },
    /// Eve keeps the targeted sequence and forwards fresh computational-basis
    /// states prepared in advance.
    InterceptResend { channel: ChannelTarget },
    /// Eve entangles every particle of the targeted sequence with a private
    /// probe.
    EntangleMeasure {
        channel: ChannelTarget,
        params: EveUnitaryParams,
    },
    /// Alice measures pairs in the computational basis and fabricates
    /// announcements that mimic the honest distribution.
    AliceFakePublish,
    /// Alice announces a summation outcome for every pair.
    AliceFloodSummation,
    /// Bob measures the particles of Charlie's sequence whose positions line
    /// up with his own computational-basis preparations.
    BobInterceptCharlie,
}

impl AttackStrategy {
    pub fn kind(&self) -> AttackKind {
        match self {
            AttackStrategy::None => AttackKind::None,
            AttackStrategy::MeasureResend { .. } => AttackKind::MeasureResend,
            AttackStrategy::InterceptResend { .. } => AttackKind::InterceptResend,
            AttackStrategy::EntangleMeasure { .. } => AttackKind::EntangleMeasure,
            AttackStrategy::AliceFakePublish => AttackKind::AliceFakePublish,
            AttackStrategy::AliceFloodSummation => AttackKind::AliceFloodSummation,
            AttackStrategy::BobInterceptCharlie => AttackKind::BobInterceptCharlie,
        }
    }

    /// The channel this strategy tampers with, if any.
    pub fn channel(&self) -> Option<ChannelTarget> {
        match self {
            AttackStrategy::MeasureResend { channel }
            | AttackStrategy::InterceptResend { channel }
            | AttackStrategy::EntangleMeasure { channel, .. } => Some(*channel),
            AttackStrategy::BobInterceptCharlie => Some(ChannelTarget::CharlieToAlice),
            AttackStrategy::None
            | AttackStrategy::AliceFakePublish
            | AttackStrategy::AliceFloodSummation => None,
        }
    }
}

/// Errors from adversary construction and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("no closed-form detection probability exists for {0:?}")]
    NoClosedForm(AttackKind),
    #[error("amplitude pair {pair} violates |alpha|^2 + |beta|^2 = 1 (got {value})")]
    AmplitudeNormalization { pair: u8, value: f64 },
    #[error("probe vectors must share one nonzero dimension")]
    ProbeDimensionMismatch,
    #[error("probe vector {label} is not unit norm (squared norm {norm_sq})")]
    ProbeNotUnit { label: &'static str, norm_sq: f64 },
    #[error("coupling is not an isometry: image overlap {overlap}")]
    NotIsometric { overlap: f64 },
    #[error("conditional probe state {which} has zero norm; leakage is undefined")]
    DegenerateConditional { which: u8 },
}

/// Eve measures every particle in the computational basis and resends the
/// post-measurement states.
pub fn measure_resend(seq: &[SingleState], rng: &mut RngStream) -> Vec<SingleState> {
    seq.iter()
        .map(|&s| projective_measure(s, Basis::Z, rng).1)
        .collect()
}

/// Result of an intercept-resend attack: the fakes forwarded to Alice and
/// the original particles Eve keeps for later measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct InterceptedSequence {
    pub resent: Vec<SingleState>,
    pub retained: Vec<SingleState>,
}

/// Eve keeps the whole sequence and forwards uniformly random
/// computational-basis states.
pub fn intercept_resend(seq: &[SingleState], rng: &mut RngStream) -> InterceptedSequence {
    let resent = seq
        .iter()
        .map(|_| SingleState::from_basis_bit(Basis::Z, rng.bit()))
        .collect();
    InterceptedSequence {
        resent,
        retained: seq.to_vec(),
    }
}

/// Result of Bob's raid on Charlie's sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BobInterceptOutcome {
    pub resent: Vec<SingleState>,
    /// Positions Bob measured, ascending.
    pub measured: Vec<usize>,
    /// The bit Bob observed at each measured position.
    pub observed: Vec<u8>,
}

/// Bob measures, in the computational basis, every particle of `seq` whose
/// position carries a computational-basis particle in his own interleaved
/// sequence. He cannot see Charlie's decoy positions, so the alignment with
/// the pairing he actually wants is off by the interleaving and some of
/// Charlie's decoys get measured along the way.
pub fn bob_intercept_charlie(
    seq: &[SingleState],
    bob_bases: &[Basis],
    rng: &mut RngStream,
) -> BobInterceptOutcome {
    let mut resent = seq.to_vec();
    let mut measured = Vec::new();
    let mut observed = Vec::new();
    for (pos, state) in resent.iter_mut().enumerate() {
        if bob_bases.get(pos) == Some(&Basis::Z) {
            let (bit, post) = projective_measure(*state, Basis::Z, rng);
            *state = post;
            measured.push(pos);
            observed.push(bit);
        }
    }
    BobInterceptOutcome { resent, measured, observed }
}

/// A cheating Alice measured one pair in the computational basis and must
/// announce something believable: equal bits mimic a pair that could have
/// collapsed onto the symmetric phi outcome, unequal bits the antisymmetric
/// psi one, and either way she claims a summation outcome half of the time
/// to keep the announced counts honest-looking.
pub fn alice_fake_publish(bits: (u8, u8), rng: &mut RngStream) -> Announcement {
    let direct = if bits.0 == bits.1 {
        DirectOutcome::PhiPlus
    } else {
        DirectOutcome::PsiMinus
    };
    if rng.bit() == 0 {
        Announcement::Direct(direct)
    } else {
        Announcement::Summation
    }
}

/// A flooding Alice announces a summation outcome unconditionally.
pub fn alice_flood_summation() -> Announcement {
    Announcement::Summation
}

/// Closed-form probability that `k` independent detection opportunities
/// (decoys for the channel attacks, check pairs for the fabricated
/// announcements) reveal the attack: `1 - (1 - p)^k` with the per-event
/// probability `p` of the attack kind.
pub fn closed_form_detection(kind: AttackKind, k: u32) -> Result<f64, AttackError> {
    Ok(1.0 - (1.0 - per_event_detection(kind)?).powi(k as i32))
}

/// Per-event closed-form detection probability, where defined: 1/4 per decoy
/// for measure-resend, 1/2 per decoy for intercept-resend, 1/4 per measured
/// decoy for Bob's raid and 1/4 per check pair for fabricated announcements.
pub fn per_event_detection(kind: AttackKind) -> Result<f64, AttackError> {
    match kind {
        AttackKind::MeasureResend
        | AttackKind::BobInterceptCharlie
        | AttackKind::AliceFakePublish => Ok(0.25),
        AttackKind::InterceptResend => Ok(0.5),
        AttackKind::None | AttackKind::EntangleMeasure | AttackKind::AliceFloodSummation => {
            Err(AttackError::NoClosedForm(kind))
        }
    }
}

/// Probability that the announcement-count test rejects a measurer who
/// claims a summation outcome for every pair. The audited diagonal-pair
/// count D is Binomial(pair_count, 1/4) and an all-summation record has
/// two-sided tail 2^(1-D), so rejection happens exactly when D clears the
/// smallest count whose tail falls below `alpha`.
pub fn flood_rejection_probability(pair_count: u64, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let k_star = (1.0 - alpha.log2()).floor() as u64 + 1;
    let diagonal = Binomial::new(0.25, pair_count).expect("valid binomial parameters");
    diagonal.sf(k_star - 1)
}

/// An empirical event count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountedRate {
    pub hits: u64,
    pub samples: u64,
}

impl CountedRate {
    pub fn new(hits: u64, samples: u64) -> Self {
        debug_assert!(hits <= samples);
        Self { hits, samples }
    }

    /// Empirical rate; 0 when nothing was sampled.
    pub fn rate(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.hits as f64 / self.samples as f64
        }
    }
}

/// Aggregated detection statistics for one attack kind over a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub kind: AttackKind,
    /// Detection events per opportunity: flipped decoys on the attacked
    /// channel, or announcement-membership violations per check pair.
    pub per_event: Option<CountedRate>,
    /// Runs aborted by the check that targets this attack.
    pub run_aborts: CountedRate,
    /// Closed-form per-event detection probability, where defined.
    pub analytic_per_event: Option<f64>,
    /// Predicted run-abort probability, where defined.
    pub analytic_run_abort: Option<f64>,
    /// Trace-distance leakage figure, where defined.
    pub leakage: Option<f64>,
}
