//! The three-user summation protocol engine.
//!
//! Alice, Bob and Charlie each hold an n-bit secret and want the bitwise XOR
//! of all three without revealing their own. Bob and Charlie prepare long
//! random sequences of single-particle states and mail them to Alice, who
//! measures position-matched pairs in the entangled basis and announces a
//! label per pair. Carefully chosen announcement granularity makes the
//! public record useless on its own while giving each party one key bit per
//! usable pair; the keys XOR to zero, so the XOR of the three masked secrets
//! equals the XOR of the secrets themselves.
//!
//! A run proceeds through the numbered steps of [`run_with_inputs`] and
//! either completes with a [`CompletedRun`] or stops at the first failed
//! check with an [`AbortReason`]. Every random draw comes from a caller-owned
//! [`RngStream`], so a run is a pure function of configuration, secrets,
//! adversary and seed.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use thiserror::Error;

use crate::attack::{self, AttackStrategy, ChannelTarget};
use crate::quantum::{
    bell_decompose, bell_measure_pair, Basis, BellOutcome, ChannelParticle, SingleState,
};
use crate::rng::RngStream;

/// Substream tags of the per-run random streams, one per independent actor.
pub const STREAM_BOB: u64 = 0;
pub const STREAM_CHARLIE: u64 = 1;
pub const STREAM_ALICE: u64 = 2;
pub const STREAM_ADVERSARY: u64 = 3;
pub const STREAM_INPUTS: u64 = 4;

/// Shape and thresholds of a protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Secret length in bits.
    pub n: usize,
    /// Extra pair budget: the preparers send `8 * (n + delta)` pairs so that
    /// enough of them survive sifting.
    pub delta: usize,
    /// Decoys Bob inserts into his sequence.
    pub gamma_b: usize,
    /// Decoys Charlie inserts into his sequence.
    pub gamma_c: usize,
    /// Significance level of the announcement-count test.
    pub alpha: f64,
    /// Largest tolerated fraction of mismatched decoys per channel. The
    /// channel is noiseless, so the default of zero aborts on any mismatch.
    #[serde(default)]
    pub decoy_tolerance: f64,
    /// Extend the impossible-announcement check from diagonal-basis pairs
    /// (the pairs the protocol audits) to every pair. Off by default.
    #[serde(default)]
    pub strict_direct_check: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n: 32,
            delta: 16,
            gamma_b: 20,
            gamma_c: 20,
            alpha: 1e-6,
            decoy_tolerance: 0.0,
            strict_direct_check: false,
        }
    }
}

impl ProtocolConfig {
    /// Number of carrier pairs the preparers send.
    pub fn pair_count(&self) -> usize {
        8 * (self.n + self.delta)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n == 0 {
            return Err(ProtocolError::EmptyMessage);
        }
        if self.delta == 0 {
            return Err(ProtocolError::EmptyPadding);
        }
        if self.gamma_b == 0 || self.gamma_c == 0 {
            return Err(ProtocolError::MissingDecoys);
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ProtocolError::InvalidAlpha(self.alpha));
        }
        if !(0.0..1.0).contains(&self.decoy_tolerance) {
            return Err(ProtocolError::InvalidTolerance(self.decoy_tolerance));
        }
        Ok(())
    }
}

/// The three n-bit secrets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretInputs {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    pub z: Vec<u8>,
}

impl SecretInputs {
    pub fn random(n: usize, rng: &mut RngStream) -> Self {
        Self { x: random_bits(n, rng), y: random_bits(n, rng), z: random_bits(n, rng) }
    }

    pub fn validate(&self, n: usize) -> Result<(), ProtocolError> {
        for bits in [&self.x, &self.y, &self.z] {
            if bits.len() != n {
                return Err(ProtocolError::InputLength { expected: n, got: bits.len() });
            }
            if bits.iter().any(|&b| b > 1) {
                return Err(ProtocolError::NonBinaryInput);
            }
        }
        Ok(())
    }

    /// Bitwise XOR of the three secrets: the value the protocol computes.
    pub fn expected_sum(&self) -> Vec<u8> {
        xor_bits(&xor_bits(&self.x, &self.y), &self.z)
    }
}

fn random_bits(n: usize, rng: &mut RngStream) -> Vec<u8> {
    (0..n).map(|_| rng.bit()).collect()
}

fn xor_bits(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// The two entangled-basis outcomes Alice announces by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectOutcome {
    PhiPlus,
    PsiMinus,
}

impl DirectOutcome {
    pub fn bell(self) -> BellOutcome {
        match self {
            DirectOutcome::PhiPlus => BellOutcome::PhiPlus,
            DirectOutcome::PsiMinus => BellOutcome::PsiMinus,
        }
    }
}

/// Alice's per-pair public announcement. The two outcomes that would reveal
/// a key bit are folded into a single summation label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Announcement {
    Direct(DirectOutcome),
    Summation,
}

/// The honest announcement rule.
pub fn announce(outcome: BellOutcome) -> Announcement {
    match outcome {
        BellOutcome::PhiPlus => Announcement::Direct(DirectOutcome::PhiPlus),
        BellOutcome::PsiMinus => Announcement::Direct(DirectOutcome::PsiMinus),
        BellOutcome::PhiMinus | BellOutcome::PsiPlus => Announcement::Summation,
    }
}

/// Alice's key bit for a summation announcement; the directly announced
/// outcomes carry no key material.
pub fn summation_key_bit(outcome: BellOutcome) -> Option<u8> {
    match outcome {
        BellOutcome::PhiMinus => Some(0),
        BellOutcome::PsiPlus => Some(1),
        BellOutcome::PhiPlus | BellOutcome::PsiMinus => None,
    }
}

/// Why a run stopped early, in protocol order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    /// A decoy in Bob's sequence measured differently than prepared.
    DecoyCheckBob,
    /// A decoy in Charlie's sequence measured differently than prepared.
    DecoyCheckCharlie,
    /// Alice announced a directly named outcome that is impossible for the
    /// states actually prepared at that position.
    AnnouncementMembership,
    /// The number of summation announcements is statistically incompatible
    /// with the expected one-half rate.
    SummationCountAnomaly,
    /// Fewer usable pairs survived sifting than the secrets have bits.
    InsufficientMessagePairs,
}

/// Counters from every check a run performed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckRecord {
    pub bob_decoys_checked: usize,
    pub bob_decoy_mismatches: usize,
    pub charlie_decoys_checked: usize,
    pub charlie_decoy_mismatches: usize,
    /// Carrier pairs sent.
    pub pairs_total: usize,
    /// Pairs where both preparers chose the diagonal basis: the subset the
    /// announcement checks audit.
    pub diagonal_check_pairs: usize,
    /// Audited direct announcements impossible for their prepared pair.
    pub membership_violations: usize,
    /// Summation announcements over all pairs.
    pub summation_announcements: usize,
    /// Summation announcements among the diagonal pairs.
    pub diagonal_summation_announcements: usize,
    /// Two-sided equal-tail exact binomial p-value of the diagonal-pair
    /// summation count against rate one-half; `None` if the run aborted
    /// earlier.
    pub summation_p_value: Option<f64>,
    /// Pairs where both preparers chose the computational basis and Alice
    /// announced a summation outcome.
    pub message_pairs: usize,
}

/// Everything transmitted or announced during a run, plus adversary ground
/// truth the simulator records for verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    /// Bob's interleaved sequence as prepared, before any tampering.
    pub bob_sequence: Vec<SingleState>,
    /// Charlie's interleaved sequence as prepared.
    pub charlie_sequence: Vec<SingleState>,
    pub bob_decoy_positions: Vec<usize>,
    pub charlie_decoy_positions: Vec<usize>,
    /// Alice's per-pair announcements; empty if the run aborted before
    /// announcements.
    pub announcements: Vec<Announcement>,
    /// For the dishonest-Bob strategy: how many of Charlie's decoys Bob's
    /// blind raid happened to measure.
    pub intercepted_decoy_count: Option<usize>,
}

/// Keys, masked shares and sums of a run that passed every check.
///
/// Keys are private to their holders in the protocol; the simulator records
/// them so tests can verify they cancel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletedRun {
    /// Transcript indices of the selected message pairs: the first n pairs
    /// where both preparers chose the computational basis and Alice
    /// announced summation.
    pub message_indices: Vec<usize>,
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
    pub charlie_key: Vec<u8>,
    /// Publicly announced masked secrets.
    pub share_a: Vec<u8>,
    pub share_b: Vec<u8>,
    pub share_c: Vec<u8>,
    /// XOR of the three shares: the jointly computed sum.
    pub computed_sum: Vec<u8>,
    /// XOR of the three secrets: what the sum should be.
    pub expected_sum: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunOutcome {
    Completed(Box<CompletedRun>),
    Aborted(AbortReason),
}

/// Full record of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub inputs: SecretInputs,
    pub outcome: RunOutcome,
    pub checks: CheckRecord,
    pub transcript: Transcript,
}

impl RunRecord {
    pub fn aborted_by(&self, reason: AbortReason) -> bool {
        matches!(self.outcome, RunOutcome::Aborted(r) if r == reason)
    }

    /// Whether the computed sum matches the true sum; `None` for aborted
    /// runs.
    pub fn sum_correct(&self) -> Option<bool> {
        match &self.outcome {
            RunOutcome::Completed(c) => Some(c.computed_sum == c.expected_sum),
            RunOutcome::Aborted(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("secret length must be at least one bit")]
    EmptyMessage,
    #[error("pair-budget padding must be at least 1")]
    EmptyPadding,
    #[error("each preparer must insert at least one decoy")]
    MissingDecoys,
    #[error("significance level must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("decoy tolerance must lie in [0, 1), got {0}")]
    InvalidTolerance(f64),
    #[error("secret input has {got} bits, expected {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("secret inputs must consist of bits")]
    NonBinaryInput,
}

/// Runs the protocol with secrets drawn from the seed itself.
pub fn run(
    config: &ProtocolConfig,
    strategy: &AttackStrategy,
    seed: u64,
) -> Result<RunRecord, ProtocolError> {
    run_with_stream(config, strategy, &RngStream::from_seed(seed))
}

/// Runs the protocol with secrets drawn from the input substream of
/// `master`.
pub fn run_with_stream(
    config: &ProtocolConfig,
    strategy: &AttackStrategy,
    master: &RngStream,
) -> Result<RunRecord, ProtocolError> {
    config.validate()?;
    let inputs = SecretInputs::random(config.n, &mut master.substream(STREAM_INPUTS));
    run_with_inputs(config, strategy, &inputs, master)
}

/// Runs the protocol on caller-supplied secrets.
///
/// Steps: (1) Bob and Charlie prepare carrier sequences, insert decoys at
/// uniformly random positions and transmit; the adversary, if any, acts on
/// the sequences in flight. (2) Alice measures each announced decoy in its
/// preparation basis and publishes the results; any disagreement aborts.
/// (3) Alice measures the surviving position-matched pairs in the entangled
/// basis and announces a label per pair; Bob and Charlie abort if a directly
/// named outcome is impossible for what they prepared, or if the summation
/// count fails an exact two-sided binomial test at level `alpha`. (4) Pairs
/// where both preparers used the computational basis and Alice announced
/// summation become key bits; the three masked secrets are announced and
/// XORed.
pub fn run_with_inputs(
    config: &ProtocolConfig,
    strategy: &AttackStrategy,
    inputs: &SecretInputs,
    master: &RngStream,
) -> Result<RunRecord, ProtocolError> {
    config.validate()?;
    inputs.validate(config.n)?;

    let mut bob_rng = master.substream(STREAM_BOB);
    let mut charlie_rng = master.substream(STREAM_CHARLIE);
    let mut alice_rng = master.substream(STREAM_ALICE);
    let mut adversary_rng = master.substream(STREAM_ADVERSARY);

    let pair_count = config.pair_count();

    // Step 1: preparation and transmission.
    let bob = Preparation::sample(pair_count, config.gamma_b, &mut bob_rng);
    let charlie = Preparation::sample(pair_count, config.gamma_c, &mut charlie_rng);

    let received_b = match strategy {
        AttackStrategy::MeasureResend { channel: ChannelTarget::BobToAlice } => {
            pure_channel(attack::measure_resend(&bob.transmitted, &mut adversary_rng))
        }
        AttackStrategy::InterceptResend { channel: ChannelTarget::BobToAlice } => {
            pure_channel(attack::intercept_resend(&bob.transmitted, &mut adversary_rng).resent)
        }
        AttackStrategy::EntangleMeasure { channel: ChannelTarget::BobToAlice, params } => bob
            .transmitted
            .iter()
            .map(|&s| ChannelParticle::Probed(params.apply_to(s)))
            .collect(),
        _ => pure_channel(bob.transmitted.clone()),
    };

    let mut intercepted_decoy_count = None;
    let received_c = match strategy {
        AttackStrategy::MeasureResend { channel: ChannelTarget::CharlieToAlice } => {
            pure_channel(attack::measure_resend(&charlie.transmitted, &mut adversary_rng))
        }
        AttackStrategy::InterceptResend { channel: ChannelTarget::CharlieToAlice } => {
            pure_channel(attack::intercept_resend(&charlie.transmitted, &mut adversary_rng).resent)
        }
        AttackStrategy::EntangleMeasure { channel: ChannelTarget::CharlieToAlice, params } => {
            charlie
                .transmitted
                .iter()
                .map(|&s| ChannelParticle::Probed(params.apply_to(s)))
                .collect()
        }
        AttackStrategy::BobInterceptCharlie => {
            let raid =
                attack::bob_intercept_charlie(&charlie.transmitted, &bob.bases, &mut adversary_rng);
            let tau = raid
                .measured
                .iter()
                .filter(|pos| charlie.decoy_positions.binary_search(pos).is_ok())
                .count();
            intercepted_decoy_count = Some(tau);
            pure_channel(raid.resent)
        }
        _ => pure_channel(charlie.transmitted.clone()),
    };

    let mut checks = CheckRecord { pairs_total: pair_count, ..CheckRecord::default() };
    let mut transcript = Transcript {
        bob_sequence: bob.transmitted.clone(),
        charlie_sequence: charlie.transmitted.clone(),
        bob_decoy_positions: bob.decoy_positions.clone(),
        charlie_decoy_positions: charlie.decoy_positions.clone(),
        announcements: Vec::new(),
        intercepted_decoy_count,
    };
    let abort = |reason, checks, transcript| {
        Ok(RunRecord {
            inputs: inputs.clone(),
            outcome: RunOutcome::Aborted(reason),
            checks,
            transcript,
        })
    };

    // Step 2: decoy checks, one channel at a time. A channel fails when its
    // mismatch fraction exceeds the tolerance (zero by default).
    let failed = |mismatches: usize, checked: usize| {
        checked > 0 && mismatches as f64 / checked as f64 > config.decoy_tolerance
    };
    let (checked, mismatches) = measure_decoys(&received_b, &bob, &mut alice_rng);
    checks.bob_decoys_checked = checked;
    checks.bob_decoy_mismatches = mismatches;
    if failed(mismatches, checked) {
        return abort(AbortReason::DecoyCheckBob, checks, transcript);
    }
    let (checked, mismatches) = measure_decoys(&received_c, &charlie, &mut alice_rng);
    checks.charlie_decoys_checked = checked;
    checks.charlie_decoy_mismatches = mismatches;
    if failed(mismatches, checked) {
        return abort(AbortReason::DecoyCheckCharlie, checks, transcript);
    }

    // Step 3: pairwise entangled-basis measurement and announcements.
    let carriers_b = strip_decoys(received_b, &bob.decoy_positions);
    let carriers_c = strip_decoys(received_c, &charlie.decoy_positions);
    debug_assert_eq!(carriers_b.len(), pair_count);
    debug_assert_eq!(carriers_c.len(), pair_count);

    let mut announcements = Vec::with_capacity(pair_count);
    // Alice's key material per pair, present wherever she announced a
    // summation outcome.
    let mut alice_keys: Vec<Option<u8>> = Vec::with_capacity(pair_count);
    let dishonest_alice = matches!(
        strategy,
        AttackStrategy::AliceFakePublish | AttackStrategy::AliceFloodSummation
    );
    for (pb, pc) in carriers_b.iter().zip(&carriers_c) {
        if dishonest_alice {
            // A cheating Alice skips the entangled measurement and reads
            // both particles in the computational basis instead.
            let b_bit = pb.measure_in(Basis::Z, &mut adversary_rng);
            let c_bit = pc.measure_in(Basis::Z, &mut adversary_rng);
            let ann = if matches!(strategy, AttackStrategy::AliceFloodSummation) {
                attack::alice_flood_summation()
            } else {
                attack::alice_fake_publish((b_bit, c_bit), &mut adversary_rng)
            };
            announcements.push(ann);
            alice_keys.push(Some(b_bit ^ c_bit));
        } else {
            let outcome = bell_measure_pair(pb, pc, &mut alice_rng);
            announcements.push(announce(outcome));
            alice_keys.push(summation_key_bit(outcome));
        }
    }
    transcript.announcements = announcements.clone();

    // Step 3 checks, audited on the pairs where both preparers chose the
    // diagonal basis: no directly announced outcome may be impossible for
    // the prepared states, and the summation count among those pairs must be
    // binomially plausible at rate one-half.
    for ((&sb, &sc), &ann) in bob.carriers.iter().zip(&charlie.carriers).zip(&announcements) {
        let diagonal = sb.basis() == Basis::X && sc.basis() == Basis::X;
        if diagonal {
            checks.diagonal_check_pairs += 1;
            if ann == Announcement::Summation {
                checks.diagonal_summation_announcements += 1;
            }
        }
        if let Announcement::Direct(d) = ann {
            if (diagonal || config.strict_direct_check)
                && !bell_decompose(sb, sc).is_possible(d.bell())
            {
                checks.membership_violations += 1;
            }
        }
    }
    checks.summation_announcements =
        announcements.iter().filter(|a| **a == Announcement::Summation).count();
    checks.summation_p_value = Some(equal_tail_binomial_p(
        checks.diagonal_summation_announcements as u64,
        checks.diagonal_check_pairs as u64,
        0.5,
    ));
    if checks.membership_violations > 0 {
        return abort(AbortReason::AnnouncementMembership, checks, transcript);
    }
    if checks.summation_p_value.unwrap() < config.alpha {
        return abort(AbortReason::SummationCountAnomaly, checks, transcript);
    }

    // Step 4: sifting, keys and the public sum. The first n message pairs in
    // transcript order carry the keys.
    let mut message_indices = Vec::new();
    let mut alice_key = Vec::new();
    let mut bob_key = Vec::new();
    let mut charlie_key = Vec::new();
    for i in 0..pair_count {
        let (sb, sc) = (bob.carriers[i], charlie.carriers[i]);
        if sb.basis() == Basis::Z
            && sc.basis() == Basis::Z
            && announcements[i] == Announcement::Summation
        {
            message_indices.push(i);
            alice_key.push(alice_keys[i].expect("summation announcements carry key material"));
            bob_key.push(sb.bit());
            charlie_key.push(sc.bit());
        }
    }
    checks.message_pairs = alice_key.len();
    if checks.message_pairs < config.n {
        return abort(AbortReason::InsufficientMessagePairs, checks, transcript);
    }
    message_indices.truncate(config.n);
    alice_key.truncate(config.n);
    bob_key.truncate(config.n);
    charlie_key.truncate(config.n);

    let share_a = xor_bits(&alice_key, &inputs.x);
    let share_b = xor_bits(&bob_key, &inputs.y);
    let share_c = xor_bits(&charlie_key, &inputs.z);
    let computed_sum = xor_bits(&xor_bits(&share_a, &share_b), &share_c);
    let expected_sum = inputs.expected_sum();

    Ok(RunRecord {
        inputs: inputs.clone(),
        outcome: RunOutcome::Completed(Box::new(CompletedRun {
            message_indices,
            alice_key,
            bob_key,
            charlie_key,
            share_a,
            share_b,
            share_c,
            computed_sum,
            expected_sum,
        })),
        checks,
        transcript,
    })
}

/// One preparer's step-1 output.
struct Preparation {
    /// Carrier states in pairing order.
    carriers: Vec<SingleState>,
    /// Decoy states, aligned with `decoy_positions`.
    decoys: Vec<SingleState>,
    /// Ascending positions of the decoys within `transmitted`.
    decoy_positions: Vec<usize>,
    /// The interleaved sequence as sent.
    transmitted: Vec<SingleState>,
    /// Preparation basis of every transmitted position.
    bases: Vec<Basis>,
}

impl Preparation {
    fn sample(carrier_count: usize, decoy_count: usize, rng: &mut RngStream) -> Self {
        let carriers: Vec<SingleState> = (0..carrier_count)
            .map(|_| random_state(rng))
            .collect();
        let decoys: Vec<SingleState> = (0..decoy_count).map(|_| random_state(rng)).collect();
        let total = carrier_count + decoy_count;
        let decoy_positions = rng.position_subset(total, decoy_count);

        let mut transmitted = Vec::with_capacity(total);
        let (mut next_carrier, mut next_decoy) = (0, 0);
        for pos in 0..total {
            if decoy_positions.get(next_decoy) == Some(&pos) {
                transmitted.push(decoys[next_decoy]);
                next_decoy += 1;
            } else {
                transmitted.push(carriers[next_carrier]);
                next_carrier += 1;
            }
        }
        let bases = transmitted.iter().map(|s| s.basis()).collect();
        Self { carriers, decoys, decoy_positions, transmitted, bases }
    }
}

fn random_state(rng: &mut RngStream) -> SingleState {
    let basis = if rng.bit() == 0 { Basis::Z } else { Basis::X };
    SingleState::from_basis_bit(basis, rng.bit())
}

fn pure_channel(states: Vec<SingleState>) -> Vec<ChannelParticle> {
    states.into_iter().map(ChannelParticle::Pure).collect()
}

/// Measures every decoy of `prep` within `received` in its preparation
/// basis, returning `(decoys checked, mismatches)`.
fn measure_decoys(
    received: &[ChannelParticle],
    prep: &Preparation,
    rng: &mut RngStream,
) -> (usize, usize) {
    let mut mismatches = 0;
    for (decoy, &pos) in prep.decoys.iter().zip(&prep.decoy_positions) {
        let bit = received[pos].measure_in(decoy.basis(), rng);
        if bit != decoy.bit() {
            mismatches += 1;
        }
    }
    (prep.decoys.len(), mismatches)
}

/// Drops the particles at `decoy_positions` (ascending), keeping carrier
/// order.
fn strip_decoys(received: Vec<ChannelParticle>, decoy_positions: &[usize]) -> Vec<ChannelParticle> {
    let mut out = Vec::with_capacity(received.len() - decoy_positions.len());
    let mut next_decoy = 0;
    for (pos, particle) in received.into_iter().enumerate() {
        if decoy_positions.get(next_decoy) == Some(&pos) {
            next_decoy += 1;
        } else {
            out.push(particle);
        }
    }
    out
}

/// Two-sided equal-tail exact binomial p-value for observing `k` successes
/// in `n` trials at success probability `p0`.
pub fn equal_tail_binomial_p(k: u64, n: u64, p0: f64) -> f64 {
    let dist = Binomial::new(p0, n).expect("valid binomial parameters");
    let lower = dist.cdf(k);
    let upper = if k == 0 { 1.0 } else { dist.sf(k - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}
