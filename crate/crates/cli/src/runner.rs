//! Monte Carlo batch driver.
//!
//! A batch derives one independent stream per trial from the master seed,
//! executes the protocol under the configured strategy, and aggregates the
//! outcomes into a [`Report`]: completion and abort counts, per-event and
//! per-run detection rates with confidence intervals, and the matching
//! closed-form predictions where they exist.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use qsum3_core::attack::entangle::{entangle_measure_detection, entangle_measure_leakage};
use qsum3_core::attack::{
    closed_form_detection, flood_rejection_probability, per_event_detection, AttackKind,
    AttackStrategy, ChannelTarget,
};
use qsum3_core::protocol::{
    run_with_inputs, run_with_stream, AbortReason, ProtocolConfig, ProtocolError, RunOutcome,
    RunRecord, SecretInputs,
};
use qsum3_core::rng::RngStream;

use crate::efficiency::{efficiency_table, EfficiencyError, TableParams};
use crate::report::{
    abort_reason_key, AnalyticSection, DetectionSection, RateEstimate, Report, ABORT_REASONS,
};

/// Substream tag under the master seed for the per-trial stream family.
const TRIAL_ROOT_TAG: u64 = 0;
/// Substream tag under the master seed for auxiliary derivations, e.g.
/// generating probe parameters when no document file supplies them. Keeping
/// this family disjoint from the trial family means parameter generation
/// never shifts the trials themselves.
const AUX_ROOT_TAG: u64 = 1;

/// The stream trial `t` of a batch runs on.
pub fn trial_stream(seed: u64, trial: u64) -> RngStream {
    RngStream::from_seed(seed).substream(TRIAL_ROOT_TAG).substream(trial)
}

/// A deterministic auxiliary stream derived from the master seed, disjoint
/// from every trial stream.
pub fn aux_stream(seed: u64) -> RngStream {
    RngStream::from_seed(seed).substream(AUX_ROOT_TAG)
}

/// Where each trial's secret inputs come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputMode {
    /// Fresh uniform bits per trial.
    Random,
    /// The same three fixed bit lists every trial.
    Fixed(SecretInputs),
}

/// Everything that defines one Monte Carlo batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSpec {
    pub config: ProtocolConfig,
    pub attack: AttackStrategy,
    pub trials: u64,
    pub input_mode: InputMode,
}

impl RunSpec {
    pub fn honest(config: ProtocolConfig, trials: u64) -> Self {
        Self { config, attack: AttackStrategy::None, trials, input_mode: InputMode::Random }
    }

    pub fn attacked(config: ProtocolConfig, attack: AttackStrategy, trials: u64) -> Self {
        Self { config, attack, trials, input_mode: InputMode::Random }
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.trials == 0 {
            return Err(RunnerError::NoTrials);
        }
        self.config.validate()?;
        if let InputMode::Fixed(inputs) = &self.input_mode {
            inputs.validate(self.config.n)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunnerError {
    NoTrials,
    Protocol(ProtocolError),
    Efficiency(EfficiencyError),
}

impl fmt::Display for RunnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoTrials => write!(f, "a batch needs at least one trial"),
            Self::Protocol(e) => write!(f, "{e}"),
            Self::Efficiency(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunnerError {}

impl From<ProtocolError> for RunnerError {
    fn from(e: ProtocolError) -> Self {
        Self::Protocol(e)
    }
}

impl From<EfficiencyError> for RunnerError {
    fn from(e: EfficiencyError) -> Self {
        Self::Efficiency(e)
    }
}

/// The abort reason a strategy is expected to trigger: the decoy check of
/// the channel it disturbs, the membership check for fabricated direct
/// announcements, or the count check for flooding. `None` for honest runs.
fn targeted_reason(attack: &AttackStrategy) -> Option<AbortReason> {
    let channel_reason = |channel: &ChannelTarget| match channel {
        ChannelTarget::BobToAlice => AbortReason::DecoyCheckBob,
        ChannelTarget::CharlieToAlice => AbortReason::DecoyCheckCharlie,
    };
    match attack {
        AttackStrategy::None => None,
        AttackStrategy::MeasureResend { channel }
        | AttackStrategy::InterceptResend { channel }
        | AttackStrategy::EntangleMeasure { channel, .. } => Some(channel_reason(channel)),
        AttackStrategy::BobInterceptCharlie => Some(AbortReason::DecoyCheckCharlie),
        AttackStrategy::AliceFakePublish => Some(AbortReason::AnnouncementMembership),
        AttackStrategy::AliceFloodSummation => Some(AbortReason::SummationCountAnomaly),
    }
}

/// The (disturbed events, audited events) counts of one run under the
/// given strategy, or `None` when the strategy has no per-event notion.
fn per_event_counts(attack: &AttackStrategy, record: &RunRecord) -> Option<(u64, u64)> {
    let checks = &record.checks;
    match attack {
        AttackStrategy::MeasureResend { channel }
        | AttackStrategy::InterceptResend { channel }
        | AttackStrategy::EntangleMeasure { channel, .. } => Some(match channel {
            ChannelTarget::BobToAlice => {
                (checks.bob_decoy_mismatches as u64, checks.bob_decoys_checked as u64)
            }
            ChannelTarget::CharlieToAlice => {
                (checks.charlie_decoy_mismatches as u64, checks.charlie_decoys_checked as u64)
            }
        }),
        // Only the decoys the raid happened to measure can mismatch, so the
        // per-measured-decoy rate divides by that emergent count.
        AttackStrategy::BobInterceptCharlie => Some((
            checks.charlie_decoy_mismatches as u64,
            record.transcript.intercepted_decoy_count.unwrap_or(0) as u64,
        )),
        AttackStrategy::AliceFakePublish => {
            Some((checks.membership_violations as u64, checks.diagonal_check_pairs as u64))
        }
        AttackStrategy::None | AttackStrategy::AliceFloodSummation => None,
    }
}

/// Closed-form run-abort prediction for strategies whose form does not
/// depend on per-run emergent counts.
fn static_run_abort_prediction(spec: &RunSpec) -> Option<f64> {
    let config = &spec.config;
    let gamma = |channel: &ChannelTarget| match channel {
        ChannelTarget::BobToAlice => config.gamma_b as u32,
        ChannelTarget::CharlieToAlice => config.gamma_c as u32,
    };
    match &spec.attack {
        AttackStrategy::None => None,
        AttackStrategy::MeasureResend { channel } => {
            closed_form_detection(AttackKind::MeasureResend, gamma(channel)).ok()
        }
        AttackStrategy::InterceptResend { channel } => {
            closed_form_detection(AttackKind::InterceptResend, gamma(channel)).ok()
        }
        AttackStrategy::EntangleMeasure { channel, params } => {
            // Escape every decoy on the attacked channel at the mean
            // detection probability over the four equiprobable decoy states.
            let mean = entangle_measure_detection(params).uniform_mean();
            Some(1.0 - (1.0 - mean).powi(gamma(channel) as i32))
        }
        // Idealized form over the pair budget: both sequences carry
        // n + delta positions' worth of audited material per secret bit.
        AttackStrategy::AliceFakePublish => {
            closed_form_detection(AttackKind::AliceFakePublish, 2 * (config.n + config.delta) as u32)
                .ok()
        }
        AttackStrategy::AliceFloodSummation => {
            Some(flood_rejection_probability(config.pair_count() as u64, config.alpha))
        }
        // Depends on the emergent number of intercepted decoys; averaged
        // per run inside the batch loop instead.
        AttackStrategy::BobInterceptCharlie => None,
    }
}

/// Runs `spec.trials` protocol executions on substreams of the master seed
/// and aggregates them into a [`Report`].
pub fn monte_carlo(spec: &RunSpec, seed: u64) -> Result<Report, RunnerError> {
    spec.validate()?;
    let started = Instant::now();
    let trial_root = RngStream::from_seed(seed).substream(TRIAL_ROOT_TAG);

    let mut completed = 0u64;
    let mut abort_counts: BTreeMap<&'static str, u64> =
        ABORT_REASONS.iter().map(|&r| (abort_reason_key(r), 0)).collect();
    let mut correctness_violations = 0u64;
    let mut event_hits = 0u64;
    let mut event_samples = 0u64;
    let mut has_per_event = false;
    let mut targeted_aborts = 0u64;
    let mut raid_prediction_sum = 0.0f64;

    let targeted = targeted_reason(&spec.attack);

    for trial in 0..spec.trials {
        let stream = trial_root.substream(trial);
        let record = match &spec.input_mode {
            InputMode::Random => run_with_stream(&spec.config, &spec.attack, &stream)?,
            InputMode::Fixed(inputs) => {
                run_with_inputs(&spec.config, &spec.attack, inputs, &stream)?
            }
        };

        match &record.outcome {
            RunOutcome::Completed(_) => {
                completed += 1;
                if record.sum_correct() == Some(false) {
                    correctness_violations += 1;
                }
            }
            RunOutcome::Aborted(reason) => {
                *abort_counts.get_mut(abort_reason_key(*reason)).expect("all keys present") += 1;
            }
        }

        if let Some((hits, samples)) = per_event_counts(&spec.attack, &record) {
            has_per_event = true;
            event_hits += hits;
            event_samples += samples;
        }

        match targeted {
            Some(reason) if record.aborted_by(reason) => targeted_aborts += 1,
            _ => {}
        }

        if spec.attack == AttackStrategy::BobInterceptCharlie {
            let tau = record.transcript.intercepted_decoy_count.unwrap_or(0) as u32;
            raid_prediction_sum +=
                closed_form_detection(AttackKind::BobInterceptCharlie, tau).expect("closed form");
        }
    }

    // For honest batches the run-abort rate reports aborts of any reason;
    // under an attack it reports only the reason the attack targets, so
    // incidental sifting shortfalls do not inflate detection.
    let abort_hits = match targeted {
        Some(_) => targeted_aborts,
        None => abort_counts.values().sum(),
    };

    let kind = spec.attack.kind();
    let analytic_per_event = match &spec.attack {
        AttackStrategy::EntangleMeasure { params, .. } => {
            Some(entangle_measure_detection(params).uniform_mean())
        }
        _ => per_event_detection(kind).ok(),
    };
    let analytic_run_abort = match &spec.attack {
        AttackStrategy::BobInterceptCharlie => Some(raid_prediction_sum / spec.trials as f64),
        _ => static_run_abort_prediction(spec),
    };
    let leakage = match &spec.attack {
        AttackStrategy::EntangleMeasure { params, .. } => entangle_measure_leakage(params).ok(),
        _ => None,
    };

    let efficiency = efficiency_table(&TableParams::from_protocol(
        spec.config.n as u64,
        spec.config.delta as u64,
    ))?;

    Ok(Report {
        spec: spec.clone(),
        completed,
        aborts: abort_counts,
        correctness_violations,
        detection: DetectionSection {
            per_event: has_per_event
                .then(|| RateEstimate::from_counts(event_hits, event_samples)),
            run_abort: RateEstimate::from_counts(abort_hits, spec.trials),
        },
        analytic: AnalyticSection {
            per_event: analytic_per_event,
            run_abort: analytic_run_abort,
            leakage,
        },
        efficiency,
        seed,
        duration_ms: Some(started.elapsed().as_millis() as u64),
    })
}
