//! End-to-end checks of the `qsum3` binary: exit codes, report shape,
//! format switches and parameter-file handling.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qsum3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsum3"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn tmp_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn honest_happy_path_reports_a_consistent_batch() {
    let out = qsum3(&["run-honest", "--n", "16", "--delta", "8", "--trials", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);

    let completed = report["completed"].as_u64().unwrap();
    let aborts: u64 = report["aborts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(completed + aborts, 100);
    assert_eq!(report["correctness_violations"], 0);
    assert_eq!(report["seed"], 7);
    assert!(report["duration_ms"].is_u64());

    // An honest batch has no per-event detection notion and no analytic
    // predictions.
    assert!(report["detection"]["per_event"].is_null());
    assert!(report["analytic"]["per_event"].is_null());
    assert!(report["analytic"]["run_abort"].is_null());

    // Every rate lies in [0, 1] and its interval brackets it.
    let rate = &report["detection"]["run_abort"];
    let (low, mid, high) = (
        rate["wilson_low"].as_f64().unwrap(),
        rate["rate"].as_f64().unwrap(),
        rate["wilson_high"].as_f64().unwrap(),
    );
    assert!(0.0 <= low && low <= mid && mid <= high && high <= 1.0);
}

#[test]
fn report_keys_keep_their_documented_order() {
    let out = qsum3(&["run-honest", "--n", "4", "--delta", "4", "--gamma-b", "2", "--gamma-c", "2", "--trials", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let expected = [
        "\"spec\"",
        "\"completed\"",
        "\"aborts\"",
        "\"correctness_violations\"",
        "\"detection\"",
        "\"analytic\"",
        "\"efficiency\"",
        "\"seed\"",
        "\"duration_ms\"",
    ];
    let positions: Vec<usize> =
        expected.iter().map(|k| text.find(k).unwrap_or_else(|| panic!("missing {k}"))).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "top-level key order drifted");
}

#[test]
fn unknown_flags_and_attacks_exit_two_with_usage() {
    let out = qsum3(&["run-honest", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr).to_lowercase();
    assert!(stderr.contains("usage"), "{stderr}");

    let out = qsum3(&["run-attack", "--attack", "no-such-attack", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr).to_lowercase();
    assert!(stderr.contains("usage") || stderr.contains("possible values"), "{stderr}");

    let out = qsum3(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_configurations_exit_two() {
    for args in [
        &["run-honest", "--delta", "0", "--trials", "5"][..],
        &["run-honest", "--n", "0", "--trials", "5"],
        &["run-honest", "--gamma-b", "0", "--trials", "5"],
        &["run-honest", "--alpha", "1.5", "--trials", "5"],
        &["run-honest", "--tolerance", "1.0", "--trials", "5"],
        &["run-honest", "--trials", "0"],
        &["efficiency", "--n", "0"],
    ] {
        let out = qsum3(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        assert!(!out.stderr.is_empty(), "args {args:?} said nothing");
    }
}

#[test]
fn fail_on_abort_turns_detections_into_exit_one() {
    let out = qsum3(&[
        "run-attack", "--attack", "measure-resend", "--n", "2", "--delta", "1", "--gamma-b", "20",
        "--trials", "20", "--seed", "1", "--fail-on-abort",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // The report is still written before the failing exit.
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["detection"]["run_abort"]["hits"].as_u64().unwrap() > 0);

    // Without an adversary and with ample padding no run aborts, so the
    // same flag exits zero.
    let out = qsum3(&[
        "run-honest", "--n", "2", "--delta", "8", "--gamma-b", "2", "--gamma-c", "2", "--trials",
        "20", "--seed", "1", "--fail-on-abort",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn fixed_inputs_must_come_as_a_complete_matching_triple() {
    let ok = qsum3(&[
        "run-honest", "--n", "4", "--delta", "8", "--gamma-b", "2", "--gamma-c", "2", "--x",
        "1010", "--y", "0110", "--z", "0011", "--trials", "10", "--seed", "2",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let report = stdout_json(&ok);
    assert_eq!(report["correctness_violations"], 0);
    assert_eq!(report["spec"]["input_mode"]["fixed"]["x"], serde_json::json!([1, 0, 1, 0]));

    let partial = qsum3(&["run-honest", "--n", "4", "--x", "1010", "--trials", "5"]);
    assert_eq!(partial.status.code(), Some(2));

    let wrong_len = qsum3(&[
        "run-honest", "--n", "4", "--x", "10", "--y", "01", "--z", "11", "--trials", "5",
    ]);
    assert_eq!(wrong_len.status.code(), Some(2));

    let not_bits = qsum3(&[
        "run-honest", "--n", "4", "--x", "10a1", "--y", "0110", "--z", "0011", "--trials", "5",
    ]);
    assert_eq!(not_bits.status.code(), Some(2));
}

#[test]
fn efficiency_subcommand_reproduces_the_worked_example() {
    let out = qsum3(&["efficiency", "--n", "64", "--delta", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let table = stdout_json(&out);
    let entries = table.as_array().unwrap();
    assert_eq!(entries.len(), 6);
    let find = |id: &str| entries.iter().find(|e| e["id"] == id).unwrap();
    let own = find("this-protocol");
    assert_eq!(own["nu"], 64);
    assert_eq!(own["q"], 1280);
    assert_eq!(own["r"], 192);
    assert_eq!(own["exact"], "1/23");
    assert_eq!(find("comparison-1")["exact"], "1/8");
    assert_eq!(find("comparison-4")["exact"], "1/4");
    assert_eq!(find("comparison-5")["exact"], "1/9");
}

#[test]
fn csv_format_flattens_reports_and_tables() {
    let out = qsum3(&[
        "run-honest", "--n", "4", "--delta", "4", "--gamma-b", "2", "--gamma-c", "2", "--trials",
        "10", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("metric,value,hits,samples,wilson_low,wilson_high"));
    assert!(text.contains("\ncompleted,"));
    assert!(text.contains("\naborts.insufficient-message-pairs,"));
    assert!(text.contains("\nefficiency.this-protocol.exact,"));

    let out = qsum3(&["efficiency", "--n", "64", "--delta", "16", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("id,nu,q,r,numerator,denominator,exact,value\n"));
    assert!(text.contains("this-protocol,64,1280,192,1,23,1/23,"));
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let path = tmp_path("honest-report.json");
    let out = qsum3(&[
        "run-honest", "--n", "4", "--delta", "4", "--gamma-b", "2", "--gamma-c", "2", "--trials",
        "10", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["completed"].as_u64().unwrap() + report["aborts"]["insufficient-message-pairs"].as_u64().unwrap(), 10);
}

#[test]
fn params_file_round_trips_through_check_entangle() {
    // A probe that copies the carrier bit into an orthogonal register:
    // invisible on computational-basis decoys, maximally leaky, and caught
    // half the time on each diagonal decoy.
    let doc = serde_json::json!({
        "alpha1": [1.0, 0.0], "beta1": [0.0, 0.0],
        "alpha2": [1.0, 0.0], "beta2": [0.0, 0.0],
        "eps00": [[1.0, 0.0], [0.0, 0.0]],
        "eps01": [[1.0, 0.0], [0.0, 0.0]],
        "eps10": [[1.0, 0.0], [0.0, 0.0]],
        "eps11": [[0.0, 0.0], [1.0, 0.0]],
    });
    let path = tmp_path("copy-probe.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();

    let out = qsum3(&["check-entangle", "--params-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout_json(&out);
    assert_eq!(summary["probe_dim"], 2);
    assert!(summary["detection"]["z0"].as_f64().unwrap().abs() < 1e-12);
    assert!(summary["detection"]["z1"].as_f64().unwrap().abs() < 1e-12);
    assert!((summary["detection"]["x_plus"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((summary["detection"]["x_minus"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((summary["leakage"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    // The same file drives an attacked batch.
    let attacked = qsum3(&[
        "run-attack", "--attack", "entangle-measure", "--params-file", path.to_str().unwrap(),
        "--n", "2", "--delta", "1", "--gamma-b", "4", "--trials", "50", "--seed", "3",
    ]);
    assert_eq!(attacked.status.code(), Some(0));
    let report = stdout_json(&attacked);
    assert!((report["analytic"]["per_event"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((report["analytic"]["leakage"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_params_files_exit_two() {
    // Unnormalized coupling amplitudes.
    let bad = serde_json::json!({
        "alpha1": [2.0, 0.0], "beta1": [0.0, 0.0],
        "alpha2": [1.0, 0.0], "beta2": [0.0, 0.0],
        "eps00": [[1.0, 0.0]], "eps01": [[1.0, 0.0]],
        "eps10": [[1.0, 0.0]], "eps11": [[1.0, 0.0]],
    });
    let path = tmp_path("bad-probe.json");
    std::fs::write(&path, serde_json::to_string(&bad).unwrap()).unwrap();
    let out = qsum3(&["check-entangle", "--params-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let missing = qsum3(&["check-entangle", "--params-file", "/no/such/file.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let garbage = tmp_path("garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    let out = qsum3(&["check-entangle", "--params-file", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_attack_kind_runs_from_the_command_line() {
    for attack in [
        "measure-resend",
        "intercept-resend",
        "entangle-measure",
        "alice-fake-publish",
        "alice-flood-summation",
        "bob-intercept-charlie",
    ] {
        let out = qsum3(&[
            "run-attack", "--attack", attack, "--n", "4", "--delta", "2", "--gamma-b", "3",
            "--gamma-c", "3", "--trials", "20", "--seed", "5",
        ]);
        assert_eq!(out.status.code(), Some(0), "attack {attack}");
        let report = stdout_json(&out);
        assert_eq!(report["spec"]["attack"]["kind"], attack);
        let completed = report["completed"].as_u64().unwrap();
        let aborts: u64 =
            report["aborts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
        assert_eq!(completed + aborts, 20, "attack {attack}");
    }
}

#[test]
fn charlie_channel_flag_reaches_the_other_decoy_check() {
    let out = qsum3(&[
        "run-attack", "--attack", "intercept-resend", "--channel", "charlie-to-alice", "--n", "2",
        "--delta", "1", "--gamma-b", "2", "--gamma-c", "10", "--trials", "40", "--seed", "8",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["spec"]["attack"]["channel"], "charlie-to-alice");
    assert!(report["aborts"]["decoy-check-charlie"].as_u64().unwrap() > 0);
    assert_eq!(report["aborts"]["decoy-check-bob"], 0);
    assert_eq!(report["detection"]["per_event"]["samples"], 400);
}
