//! Aggregated batch reports: counts, rates with Wilson confidence
//! intervals, analytic predictions and the efficiency table.
//!
//! JSON serialization preserves the struct field order below so that two
//! identical invocations emit byte-identical documents. The CSV form
//! flattens the same content into one `metric,value` row per quantity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use qsum3_core::attack::AttackKind;
use qsum3_core::protocol::AbortReason;

use crate::efficiency::EfficiencyEntry;
use crate::runner::{InputMode, RunSpec};

/// Normal quantile for a two-sided 95% interval.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Wilson score interval at 95% confidence, clamped to `[0, 1]`.
///
/// Zero samples carry no information and yield the full interval.
pub fn wilson_interval(hits: u64, samples: u64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let z_sq = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z_sq / n;
    let center = (p + z_sq / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z_sq / (4.0 * n * n)).sqrt() / denom;
    // At the boundaries one root of the score equation is exactly 0 or 1;
    // pin it so rounding noise cannot push the interval past the estimate.
    let low = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if hits == samples { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// An empirical rate with its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub hits: u64,
    pub samples: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl RateEstimate {
    pub fn from_counts(hits: u64, samples: u64) -> Self {
        debug_assert!(hits <= samples);
        let rate = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        let (wilson_low, wilson_high) = wilson_interval(hits, samples);
        Self { hits, samples, rate, wilson_low, wilson_high }
    }

    /// Whether the interval covers a hypothesized value.
    pub fn covers(&self, value: f64) -> bool {
        self.wilson_low <= value && value <= self.wilson_high
    }
}

/// Empirical detection rates of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionSection {
    /// Rate over the individual audited events the attack disturbs
    /// (decoys on the attacked channel, or audited announcement pairs);
    /// absent when the attack has no per-event notion.
    pub per_event: Option<RateEstimate>,
    /// Rate of runs ended by the abort reason the attack targets. For
    /// honest batches this counts aborts of any reason.
    pub run_abort: RateEstimate,
}

/// Closed-form predictions matching [`DetectionSection`], where they exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticSection {
    pub per_event: Option<f64>,
    pub run_abort: Option<f64>,
    /// Upper bound on what an undetected probe learns; only defined for
    /// the entangling probe.
    pub leakage: Option<f64>,
}

/// Full result of one Monte Carlo batch.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Echo of the batch parameters.
    pub spec: RunSpec,
    pub completed: u64,
    /// Abort counts per reason; every reason is present, zeros included.
    pub aborts: BTreeMap<&'static str, u64>,
    /// Completed runs whose announced sum differs from the true sum.
    pub correctness_violations: u64,
    pub detection: DetectionSection,
    pub analytic: AnalyticSection,
    /// The six-entry efficiency comparison at the batch parameters.
    pub efficiency: Vec<EfficiencyEntry>,
    pub seed: u64,
    /// Wall-clock batch duration; `None` when timing is redacted for
    /// byte-identical output.
    pub duration_ms: Option<u64>,
}

/// Stable text key of an abort reason, identical to its serialized name.
pub fn abort_reason_key(reason: AbortReason) -> &'static str {
    match reason {
        AbortReason::DecoyCheckBob => "decoy-check-bob",
        AbortReason::DecoyCheckCharlie => "decoy-check-charlie",
        AbortReason::AnnouncementMembership => "announcement-membership",
        AbortReason::SummationCountAnomaly => "summation-count-anomaly",
        AbortReason::InsufficientMessagePairs => "insufficient-message-pairs",
    }
}

/// All abort reasons, in the order checks run.
pub const ABORT_REASONS: [AbortReason; 5] = [
    AbortReason::DecoyCheckBob,
    AbortReason::DecoyCheckCharlie,
    AbortReason::AnnouncementMembership,
    AbortReason::SummationCountAnomaly,
    AbortReason::InsufficientMessagePairs,
];

/// Stable text key of an attack kind, identical to its serialized name.
pub fn attack_kind_key(kind: AttackKind) -> &'static str {
    match kind {
        AttackKind::None => "none",
        AttackKind::MeasureResend => "measure-resend",
        AttackKind::InterceptResend => "intercept-resend",
        AttackKind::EntangleMeasure => "entangle-measure",
        AttackKind::AliceFakePublish => "alice-fake-publish",
        AttackKind::AliceFloodSummation => "alice-flood-summation",
        AttackKind::BobInterceptCharlie => "bob-intercept-charlie",
    }
}

impl Report {
    pub fn total_aborts(&self) -> u64 {
        self.aborts.values().sum()
    }

    /// Drop the wall-clock field so identical invocations serialize
    /// byte-identically.
    pub fn redact_timing(mut self) -> Self {
        self.duration_ms = None;
        self
    }

    /// Pretty JSON document, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flat CSV document: one row per metric with empty cells where a
    /// column does not apply.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value,hits,samples,wilson_low,wilson_high\n");
        let mut plain = |metric: &str, value: String| {
            let _ = writeln!(out, "{metric},{value},,,,");
        };
        plain("spec.n", self.spec.config.n.to_string());
        plain("spec.delta", self.spec.config.delta.to_string());
        plain("spec.gamma_b", self.spec.config.gamma_b.to_string());
        plain("spec.gamma_c", self.spec.config.gamma_c.to_string());
        plain("spec.alpha", self.spec.config.alpha.to_string());
        plain("spec.decoy_tolerance", self.spec.config.decoy_tolerance.to_string());
        plain("spec.attack", attack_kind_key(self.spec.attack.kind()).to_string());
        plain("spec.trials", self.spec.trials.to_string());
        plain(
            "spec.input_mode",
            match self.spec.input_mode {
                InputMode::Random => "random".to_string(),
                InputMode::Fixed(_) => "fixed".to_string(),
            },
        );
        plain("completed", self.completed.to_string());
        for (key, count) in &self.aborts {
            plain(&format!("aborts.{key}"), count.to_string());
        }
        plain("correctness_violations", self.correctness_violations.to_string());
        let mut rate = |metric: &str, estimate: Option<RateEstimate>| match estimate {
            Some(e) => {
                let _ = writeln!(
                    out,
                    "{metric},{},{},{},{},{}",
                    e.rate, e.hits, e.samples, e.wilson_low, e.wilson_high
                );
            }
            None => {
                let _ = writeln!(out, "{metric},,,,,");
            }
        };
        rate("detection.per_event", self.detection.per_event);
        rate("detection.run_abort", Some(self.detection.run_abort));
        let mut optional = |metric: &str, value: Option<f64>| {
            let _ = match value {
                Some(v) => writeln!(out, "{metric},{v},,,,"),
                None => writeln!(out, "{metric},,,,,"),
            };
        };
        optional("analytic.per_event", self.analytic.per_event);
        optional("analytic.run_abort", self.analytic.run_abort);
        optional("analytic.leakage", self.analytic.leakage);
        for e in &self.efficiency {
            let _ = writeln!(out, "efficiency.{}.exact,{},,,,", e.id, e.exact);
            let _ = writeln!(out, "efficiency.{}.value,{},,,,", e.id, e.value);
        }
        let _ = writeln!(out, "seed,{},,,,", self.seed);
        match self.duration_ms {
            Some(ms) => {
                let _ = writeln!(out, "duration_ms,{ms},,,,");
            }
            None => {
                let _ = writeln!(out, "duration_ms,,,,,");
            }
        }
        out
    }
}
