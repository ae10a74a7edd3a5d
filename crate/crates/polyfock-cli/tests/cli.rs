//! Binary-level tests: exit codes, report emission, determinism. These
//! only exercise the cheap checks so the suite stays fast.

use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyfock-cli"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

const ALL_CHECKS: [&str; 12] = [
    "pairing",
    "shifted-kernel",
    "prop-identities",
    "toeplitz-character",
    "vanishing-toeplitz",
    "berezin-kernel",
    "berezin-toeplitz-chain",
    "heat-approximation",
    "regularity-scan",
    "localization",
    "partition-demo",
    "berezin-decay",
];

#[test]
fn list_prints_every_registered_check() {
    let out = cli(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ALL_CHECKS {
        assert!(
            text.lines().any(|l| l.starts_with(name)),
            "missing {name} in list output"
        );
    }
    assert_eq!(text.lines().count(), ALL_CHECKS.len());
}

#[test]
fn passing_check_exits_zero_with_schema_fields() {
    let out = cli(&["run", "pairing", "--trunc", "32"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json report");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["check_name"], "pairing");
    assert_eq!(report["overall_pass"], true);
    assert!(report["runtime_ms"].is_u64());
    let metrics = report["metrics"].as_array().expect("metrics array");
    assert!(!metrics.is_empty());
    for m in metrics {
        assert!(m["name"].is_string());
        assert!(m["value"].is_number());
        assert!(m["tolerance"].is_number());
        assert!(m["pass"].is_boolean());
    }
    assert_eq!(report["params"]["trunc"], 32);
}

#[test]
fn reruns_are_deterministic() {
    let mut reports = Vec::new();
    for _ in 0..2 {
        let out = cli(&["run", "shifted-kernel", "--trunc", "32", "--seed", "11"]);
        assert_eq!(out.status.code(), Some(0));
        let mut report: serde_json::Value =
            serde_json::from_str(&stdout(&out)).expect("json report");
        report["runtime_ms"] = serde_json::Value::Null;
        reports.push(report);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn perturbed_check_exits_one_and_reports_failure() {
    let out = cli(&["run", "pairing", "--trunc", "32", "--perturb", "1e-2"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json report");
    assert_eq!(report["overall_pass"], false);
}

#[test]
fn unknown_check_exits_two() {
    let out = cli(&["run", "no-such-check"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown check"));
}

#[test]
fn malformed_xi_exits_two() {
    let out = cli(&["run", "pairing", "--xi", "banana"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_script_without_csv_exits_two() {
    let out = cli(&["run", "pairing", "--trunc", "32", "--plot-script", "/tmp/x.gp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--csv"));
}

#[test]
fn starved_quadrature_exits_three() {
    let out = cli(&[
        "run",
        "pairing",
        "--grid-radial",
        "8",
        "--grid-angular",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("quadrature insufficient"));
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().expect("tempdir");
    let json = dir.path().join("report.json");
    let csv = dir.path().join("metrics.csv");
    let script = dir.path().join("plot.gp");
    let out = cli(&[
        "run",
        "pairing",
        "--trunc",
        "32",
        "--out",
        path_str(&json),
        "--csv",
        path_str(&csv),
        "--plot-script",
        path_str(&script),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).is_empty(), "report went to the file instead");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).expect("json file"))
            .expect("json parses");
    assert_eq!(report["check_name"], "pairing");

    let csv_text = std::fs::read_to_string(&csv).expect("csv file");
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("name,value,tolerance,pass"));
    assert!(lines.next().expect("one metric row").contains("gram_identity_dev"));

    let script_text = std::fs::read_to_string(&script).expect("script file");
    assert!(script_text.contains("metrics.csv"));
    assert!(script_text.contains("plot"));
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf8 path")
}
