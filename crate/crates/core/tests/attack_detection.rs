//! Detection statistics of every adversary, pooled over full protocol runs
//! and compared against the closed forms.

use qsum3_core::attack::entangle::{
    entangle_measure_detection, EveUnitaryParams, DEFAULT_PROBE_DIM,
};
use qsum3_core::attack::{closed_form_detection, AttackKind, AttackStrategy, ChannelTarget};
use qsum3_core::protocol::{run, AbortReason, ProtocolConfig, RunOutcome};
use qsum3_core::rng::RngStream;

/// |freq - p| < 4 sigma for a pooled Bernoulli sample.
fn assert_rate(hits: usize, samples: usize, p: f64, label: &str) {
    let freq = hits as f64 / samples as f64;
    let sigma = (p * (1.0 - p) / samples as f64).sqrt();
    assert!(
        (freq - p).abs() < 4.0 * sigma,
        "{label}: observed {freq} over {samples} samples, expected {p}"
    );
}

#[test]
fn measure_resend_decoy_flips_and_run_aborts_match_closed_form() {
    let config =
        ProtocolConfig { n: 4, delta: 1, gamma_b: 20, gamma_c: 1, ..ProtocolConfig::default() };
    let strategy = AttackStrategy::MeasureResend { channel: ChannelTarget::BobToAlice };
    let mut mismatches = 0usize;
    let mut decoys = 0usize;
    let mut aborts = 0usize;
    let runs = 500u64;
    for seed in 0..runs {
        let record = run(&config, &strategy, seed).unwrap();
        mismatches += record.checks.bob_decoy_mismatches;
        decoys += record.checks.bob_decoys_checked;
        aborts += usize::from(record.aborted_by(AbortReason::DecoyCheckBob));
    }
    assert_rate(mismatches, decoys, 0.25, "per-decoy flip rate");
    let p_run = closed_form_detection(AttackKind::MeasureResend, 20).unwrap();
    assert_rate(aborts, runs as usize, p_run, "run abort rate");
}

#[test]
fn intercept_resend_decoy_flips_and_run_aborts_match_closed_form() {
    let config =
        ProtocolConfig { n: 4, delta: 1, gamma_b: 1, gamma_c: 5, ..ProtocolConfig::default() };
    let strategy = AttackStrategy::InterceptResend { channel: ChannelTarget::CharlieToAlice };
    let mut mismatches = 0usize;
    let mut decoys = 0usize;
    let mut aborts = 0usize;
    let runs = 800u64;
    for seed in 0..runs {
        let record = run(&config, &strategy, seed).unwrap();
        mismatches += record.checks.charlie_decoy_mismatches;
        decoys += record.checks.charlie_decoys_checked;
        aborts += usize::from(record.aborted_by(AbortReason::DecoyCheckCharlie));
    }
    assert_rate(mismatches, decoys, 0.5, "per-decoy flip rate");
    let p_run = closed_form_detection(AttackKind::InterceptResend, 5).unwrap();
    assert_rate(aborts, runs as usize, p_run, "run abort rate");
}

#[test]
fn bob_raid_statistics_follow_the_quarter_rate_per_intercepted_decoy() {
    let config =
        ProtocolConfig { n: 8, delta: 2, gamma_b: 20, gamma_c: 20, ..ProtocolConfig::default() };
    let mut mismatches = 0usize;
    let mut tau_total = 0usize;
    let mut aborts = 0usize;
    let mut predicted_aborts = 0.0f64;
    let mut predicted_var = 0.0f64;
    let runs = 500u64;
    for seed in 0..runs {
        let record = run(&config, &AttackStrategy::BobInterceptCharlie, seed).unwrap();
        let tau = record.transcript.intercepted_decoy_count.unwrap();
        mismatches += record.checks.charlie_decoy_mismatches;
        tau_total += tau;
        aborts += usize::from(record.aborted_by(AbortReason::DecoyCheckCharlie));
        // The run-level prediction conditions on this run's tau.
        let p = closed_form_detection(AttackKind::BobInterceptCharlie, tau as u32).unwrap();
        predicted_aborts += p;
        predicted_var += p * (1.0 - p);
    }
    assert_rate(mismatches, tau_total, 0.25, "per-intercepted-decoy flip rate");
    let sigma = predicted_var.sqrt();
    assert!(
        (aborts as f64 - predicted_aborts).abs() < 4.0 * sigma,
        "aborts {aborts} vs predicted {predicted_aborts} (sigma {sigma})"
    );
}

#[test]
fn fake_publish_violations_hit_a_quarter_of_diagonal_pairs() {
    let config =
        ProtocolConfig { n: 8, delta: 2, gamma_b: 1, gamma_c: 1, ..ProtocolConfig::default() };
    let mut violations = 0usize;
    let mut diagonal = 0usize;
    let mut aborts = 0usize;
    let mut predicted_aborts = 0.0f64;
    let mut predicted_var = 0.0f64;
    let runs = 400u64;
    for seed in 0..runs {
        let record = run(&config, &AttackStrategy::AliceFakePublish, seed).unwrap();
        violations += record.checks.membership_violations;
        diagonal += record.checks.diagonal_check_pairs;
        aborts += usize::from(record.aborted_by(AbortReason::AnnouncementMembership));
        let p = closed_form_detection(
            AttackKind::AliceFakePublish,
            record.checks.diagonal_check_pairs as u32,
        )
        .unwrap();
        predicted_aborts += p;
        predicted_var += p * (1.0 - p);
    }
    assert_rate(violations, diagonal, 0.25, "per-diagonal-pair violation rate");
    let sigma = predicted_var.sqrt().max(1.0);
    assert!(
        (aborts as f64 - predicted_aborts).abs() < 4.0 * sigma,
        "aborts {aborts} vs predicted {predicted_aborts} (sigma {sigma})"
    );
}

#[test]
fn flooding_trips_the_count_test_in_every_run() {
    let config = ProtocolConfig {
        n: 16,
        delta: 16,
        gamma_b: 4,
        gamma_c: 4,
        ..ProtocolConfig::default()
    };
    for seed in 0..200u64 {
        let record = run(&config, &AttackStrategy::AliceFloodSummation, seed).unwrap();
        assert!(
            record.aborted_by(AbortReason::SummationCountAnomaly),
            "seed {seed}: {:?}",
            record.outcome
        );
        assert_eq!(record.checks.summation_announcements, record.checks.pairs_total);
        assert_eq!(
            record.checks.diagonal_summation_announcements,
            record.checks.diagonal_check_pairs
        );
    }
}

#[test]
fn entangling_probe_statistics_match_its_coupling_parameters() {
    let mut param_rng = RngStream::from_seed(0xE0E0);
    let params = EveUnitaryParams::random(DEFAULT_PROBE_DIM, &mut param_rng);
    let mean_detection = entangle_measure_detection(&params).uniform_mean();

    let gamma = 10usize;
    let config = ProtocolConfig {
        n: 4,
        delta: 1,
        gamma_b: gamma,
        gamma_c: 1,
        ..ProtocolConfig::default()
    };
    let strategy = AttackStrategy::EntangleMeasure {
        channel: ChannelTarget::BobToAlice,
        params: params.clone(),
    };
    let mut mismatches = 0usize;
    let mut decoys = 0usize;
    let mut aborts = 0usize;
    let runs = 400u64;
    for seed in 0..runs {
        let record = run(&config, &strategy, seed).unwrap();
        mismatches += record.checks.bob_decoy_mismatches;
        decoys += record.checks.bob_decoys_checked;
        aborts += usize::from(record.aborted_by(AbortReason::DecoyCheckBob));
    }
    assert_rate(mismatches, decoys, mean_detection, "per-decoy flip rate");
    let p_run = 1.0 - (1.0 - mean_detection).powi(gamma as i32);
    assert_rate(aborts, runs as usize, p_run, "run abort rate");
}

#[test]
fn identity_probe_is_never_detected() {
    let config =
        ProtocolConfig { n: 4, delta: 2, gamma_b: 10, gamma_c: 1, ..ProtocolConfig::default() };
    let strategy = AttackStrategy::EntangleMeasure {
        channel: ChannelTarget::BobToAlice,
        params: EveUnitaryParams::identity(2),
    };
    for seed in 0..100u64 {
        let record = run(&config, &strategy, seed).unwrap();
        assert_eq!(record.checks.bob_decoy_mismatches, 0, "seed {seed}");
        assert_eq!(record.checks.membership_violations, 0, "seed {seed}");
        if let RunOutcome::Aborted(reason) = record.outcome {
            assert_eq!(reason, AbortReason::InsufficientMessagePairs, "seed {seed}");
        }
    }
}
