use std::path::Path;
use std::process::{Command, Output};

use moea_core::harness::{RunLog, RunMetrics};

fn moea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moea"))
        .args(args)
        .env_remove("PROVIDER_URL")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_metrics_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", r#"{"population_size": 6, "budget": {"max_evaluations": 120}}"#);
    let mut metric_files = Vec::new();
    for variant in ["full", "baseline"] {
        let out = dir.path().join(variant);
        let o = moea(&["run", "--config", &config, "--variant", variant, "--seed", "4", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let metrics: RunMetrics =
            serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
        assert_eq!(metrics.solutions_generated, 120);
        assert_eq!(metrics.master_seed, 4);

        let log_path = out.join("log.jsonl");
        let log = RunLog::from_jsonl(&std::fs::read_to_string(&log_path).unwrap()).unwrap();
        assert!(!log.events.is_empty());
        let o = moea(&["metrics", "--log", log_path.to_str().unwrap()]);
        assert!(o.status.success());
        let replayed: RunMetrics = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(replayed, metrics);
        metric_files.push(out.join("metrics.json").to_str().unwrap().to_string());
    }

    let report = dir.path().join("report.md");
    let mut args = vec!["compare"];
    args.extend(metric_files.iter().map(String::as_str));
    args.extend(["--out", report.to_str().unwrap()]);
    let o = moea(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&report).unwrap();
    assert!(table.contains("| full | 1 | types_detected |"));
    assert!(table.contains("| baseline | 1 | types_detected |"));
    let csv = std::fs::read_to_string(report.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("evaluation,full_seed4,baseline_seed4"));
    assert_eq!(csv.lines().count(), 121);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", "{}");
    assert_eq!(moea(&["validate-config", &good]).status.code(), Some(0));

    let bad = write(dir.path(), "bad.json", r#"{"population_size": 1}"#);
    assert_eq!(moea(&["validate-config", &bad]).status.code(), Some(2));
    let out = dir.path().join("x");
    let o = moea(&["run", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let remote = write(dir.path(), "remote.json", r#"{"seeding": {"provider": {"kind": "remote", "model": "m"}}}"#);
    let o = moea(&["run", "--config", &remote, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let nameless = write(dir.path(), "nameless.json", r#"{"seeding": {"provider": {"kind": "remote"}}}"#);
    assert_eq!(moea(&["validate-config", &nameless]).status.code(), Some(2));

    let log = write(dir.path(), "bad.jsonl", "{\"event\": \"finished\"}\n");
    assert_eq!(moea(&["metrics", "--log", &log]).status.code(), Some(4));
    let garbage = write(dir.path(), "garbage.jsonl", "not json\n");
    assert_eq!(moea(&["metrics", "--log", &garbage]).status.code(), Some(4));
}
