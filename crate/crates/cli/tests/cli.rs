//! End-to-end checks of the `sosc` binary: every subcommand through a
//! real process, asserting on exit status, stdout, and stderr. Exit
//! code contract: 0 pass, 1 check failed, 2 usage/IO/parse error.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sosc_avsos::{document, FAULT_UNRELIABLE_TRANSMISSION};
use sosc_core::{DepEdge, Waiver};
use sosc_dsl::serialize_document;

const MODEL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/avsos.sosc");

/// The four timeout durations every file-based run of the case study
/// needs; the file declares the names but carries no values.
const TIMEOUTS: [&str; 8] = [
    "--timeout",
    "election_timeout=10",
    "--timeout",
    "wrapper_timeout=3",
    "--timeout",
    "tl_delivery_timeout=2",
    "--timeout",
    "pump_gap=25",
];

fn sosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sosc")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn write_model(dir: &Path, name: &str, doc: &sosc_dsl::ModelDocument) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serialize_document(doc)).expect("model written");
    path
}

#[test]
fn validate_accepts_the_shipped_model_file() {
    let out = sosc(&["validate", MODEL]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "", "a clean model prints no diagnostics");
    assert_eq!(stderr(&out), "");
}

#[test]
fn validate_prints_each_error_and_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut doc = document();
    doc.dependability
        .as_mut()
        .expect("dependability present")
        .edges
        .retain(|e| !matches!(e, DepEdge::MitigatedBy { .. }));
    let path = write_model(dir.path(), "unmitigated.sosc", &doc);
    let out = sosc(&["validate", path.to_str().expect("utf8 path")]);
    assert_eq!(code(&out), 1);
    let report = stdout(&out);
    assert!(report.contains("UNMITIGATED_SOS_FAULT"), "stdout: {report}");
    assert!(report.contains(FAULT_UNRELIABLE_TRANSMISSION), "stdout: {report}");
    assert!(
        report.starts_with(path.to_str().expect("utf8 path")),
        "diagnostics carry the file name: {report}"
    );
    assert_eq!(stderr(&out), "1 error(s)\n");
}

#[test]
fn validate_keeps_waived_faults_at_exit_zero_but_says_so() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut doc = document();
    let dep = doc.dependability.as_mut().expect("dependability present");
    dep.edges.retain(|e| !matches!(e, DepEdge::MitigatedBy { .. }));
    dep.waived.push(Waiver {
        dysfunction: FAULT_UNRELIABLE_TRANSMISSION.to_string(),
        reason: "accepted for the demo rig".to_string(),
    });
    for c in &mut doc.contracts {
        c.mitigates.clear();
    }
    let path = write_model(dir.path(), "waived.sosc", &doc);
    let out = sosc(&["validate", path.to_str().expect("utf8 path")]);
    assert_eq!(code(&out), 0, "a waiver downgrades the gap: {}", stdout(&out));
    let report = stdout(&out);
    assert!(report.contains("warning[WAIVED_FAULT]"), "stdout: {report}");
    assert!(report.contains("accepted for the demo rig"), "stdout: {report}");
    assert_eq!(stderr(&out), "");
}

#[test]
fn validate_reports_parse_position_and_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("broken.sosc");
    std::fs::write(&path, "contract Broken {\n  params {").expect("model written");
    let out = sosc(&["validate", path.to_str().expect("utf8 path")]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout(&out), "");
    let err = stderr(&out);
    assert!(err.starts_with("error: "), "stderr: {err}");
    assert!(err.contains("error[PARSE]"), "stderr: {err}");
    assert!(err.contains("broken.sosc:"), "the position names the file: {err}");
}

#[test]
fn validate_reports_missing_files_as_io_errors() {
    let out = sosc(&["validate", "/nonexistent/model.sosc"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error: /nonexistent/model.sosc:"));
}

#[test]
fn simulate_runs_are_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = sosc(&[
            "simulate",
            "builtin:avsos",
            "--drop-prob",
            "0.3",
            "--seed",
            "42",
            "--out",
            path.to_str().expect("utf8 path"),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let first = std::fs::read(&a).expect("trace a");
    let second = std::fs::read(&b).expect("trace b");
    assert!(!first.is_empty());
    assert_eq!(first, second, "equal seeds replay the identical trace");
}

#[test]
fn simulate_streams_jsonl_with_a_terminal_line() {
    let out = sosc(&["simulate", "builtin:avsos", "--seed", "7"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() > 2);
    for line in &lines {
        let v: serde_json::Value = serde_json::from_str(line).expect("each line is JSON");
        assert!(v.is_object());
    }
    assert!(
        text.contains("\"label\":\"leader_elected\""),
        "a lossless run elects a leader: {text}"
    );
    assert!(lines.last().expect("nonempty").contains("\"terminal\""));
}

#[test]
fn simulate_requires_timeout_values_for_file_models() {
    let out = sosc(&["simulate", MODEL]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("has no configured duration"), "stderr: {err}");
}

#[test]
fn a_file_model_explores_exactly_like_the_builtin_it_mirrors() {
    let mut args = vec![
        "explore",
        MODEL,
        "--sos",
        "AV_SoS_FT",
        "--budget",
        "1",
        "--per-message",
        "--data-only",
        "--property",
        "agreement",
        "--max-depth",
        "60",
    ];
    args.extend_from_slice(&TIMEOUTS);
    let from_file = sosc(&args);
    let from_builtin = sosc(&[
        "explore",
        "builtin:avsos",
        "--fault-tolerant",
        "--budget",
        "1",
        "--per-message",
        "--data-only",
        "--property",
        "agreement",
        "--max-depth",
        "60",
    ]);
    assert_eq!(code(&from_file), 0, "stderr: {}", stderr(&from_file));
    assert_eq!(code(&from_builtin), 0, "stderr: {}", stderr(&from_builtin));
    assert_eq!(
        stdout(&from_file),
        stdout(&from_builtin),
        "the serialized model and the builders describe one system"
    );
}

#[test]
fn explore_flags_divergence_with_a_counterexample() {
    let out = sosc(&[
        "explore",
        "builtin:avsos",
        "--budget",
        "1",
        "--property",
        "agreement",
        "--max-depth",
        "40",
    ]);
    assert_eq!(code(&out), 1, "a reachable disagreement fails the check");
    let report: serde_json::Value =
        serde_json::from_str(stdout(&out).trim()).expect("report is JSON");
    assert_eq!(report["result"], "FAIL");
    assert_eq!(report["property"], "agreement");
    assert!(report["states"].as_u64().expect("states") > 0);
    let witness = report["counterexample"].as_array().expect("counterexample array");
    assert!(!witness.is_empty());
    assert!(witness.iter().all(|e| e["label"].is_string()), "events carry labels");
}

#[test]
fn explore_without_errors_passes_with_exit_zero() {
    let out = sosc(&[
        "explore",
        "builtin:avsos",
        "--property",
        "agreement",
        "--property",
        "no-duplicate-decision",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(stdout(&out).trim()).expect("report is JSON");
    assert_eq!(report["result"], "PASS");
    assert_eq!(report["frontierAtBound"], 0, "the bound never truncated a schedule");
    assert!(report.get("counterexample").is_none());
}

#[test]
fn explore_rejects_unknown_properties() {
    let out = sosc(&["explore", "builtin:avsos", "--property", "liveness"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("unknown property `liveness`"), "stderr: {err}");
    assert!(err.contains("agreement, no-duplicate-decision, give-up-bound"), "stderr: {err}");
}

#[test]
fn conform_confirms_the_nominal_transport_refines_the_faulty_one() {
    let out = sosc(&[
        "conform",
        "--impl",
        "builtin:tl-nominal",
        "--contract",
        "builtin:tl-faulty",
        "--depth",
        "5",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(stdout(&out).trim()).expect("report is JSON");
    assert_eq!(report["verdict"], "CONFORMS");
    assert_eq!(report["depth"], 5);
    assert!(report.get("witness").is_none());
}

#[test]
fn conform_rejects_the_faulty_transport_as_a_nominal_refinement() {
    let out = sosc(&[
        "conform",
        "--impl",
        "builtin:tl-faulty",
        "--contract",
        "builtin:tl-nominal",
        "--depth",
        "5",
    ]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value =
        serde_json::from_str(stdout(&out).trim()).expect("report is JSON");
    assert_eq!(report["verdict"], "VIOLATES");
    let witness: Vec<&str> = report["witness"]
        .as_array()
        .expect("witness array")
        .iter()
        .map(|l| l.as_str().expect("label"))
        .collect();
    assert_eq!(witness, ["LE_SendMsgs", "TL_Timeout"], "a drop shows up as a spurious timeout");
}

#[test]
fn conform_reads_contracts_out_of_model_files() {
    let spec = format!("{MODEL}#TL_Nominal");
    let out = sosc(&["conform", "--impl", &spec, "--contract", "builtin:tl-nominal"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("\"verdict\":\"CONFORMS\""));
}

#[test]
fn conform_reports_missing_contracts_as_usage_errors() {
    let spec = format!("{MODEL}#NoSuchContract");
    let out = sosc(&["conform", "--impl", &spec, "--contract", "builtin:tl-nominal"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no contract named `NoSuchContract`"));
}

#[test]
fn report_loss_is_deterministic_and_matches_the_closed_form() {
    let args = [
        "report",
        "--loss",
        "--drop-prob",
        "0.3",
        "--retries",
        "1",
        "--messages",
        "2000",
        "--seed",
        "3",
    ];
    let first = sosc(&args);
    let second = sosc(&args);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&second), "equal seeds give one report");
    let report: serde_json::Value =
        serde_json::from_str(stdout(&first).trim()).expect("report is JSON");
    assert_eq!(report["messagesSent"], 2000);
    assert_eq!(report["predictedLossRate"], 0.09);
    let observed = report["observedLossRate"].as_f64().expect("rate");
    assert!(
        (observed - 0.09).abs() < 0.05,
        "observed {observed} should sit near the closed form 0.09"
    );
}

#[test]
fn report_needs_a_kind_flag() {
    let out = sosc(&["report"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("pick a report kind: --loss"));
}

#[test]
fn builtin_shape_flags_are_rejected_for_file_models() {
    let out = sosc(&["simulate", MODEL, "--devices", "3"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("apply only to builtin:avsos"));
}

#[test]
fn sos_flag_is_rejected_for_the_builtin_model() {
    let out = sosc(&["explore", "builtin:avsos", "--sos", "AV_SoS"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("picks its composition with --fault-tolerant"));
}

#[test]
fn unknown_builtins_are_named_in_the_error() {
    let out = sosc(&["simulate", "builtin:zork"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown builtin `builtin:zork`"));
}

#[test]
fn malformed_timeout_flags_are_usage_errors() {
    let out = sosc(&["simulate", MODEL, "--timeout", "election_timeout"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--timeout wants NAME=TICKS"));
}

#[test]
fn unknown_subcommands_exit_two() {
    let out = sosc(&["frobnicate"]);
    assert_eq!(code(&out), 2);
}
