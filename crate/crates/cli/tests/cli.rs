use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn replaylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replaylab")).args(args).output().expect("binary runs")
}

const HARD_CLASS_RUN: [&str; 12] = [
    "--generator", "wp", "--adversary", "fair", "--class", "nonuniform-hard", "--target", "member:index=6",
    "--horizon", "500", "--inject-rate", "0.3",
];

fn run_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    replaylab(&args)
}

fn lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_500_rounds_with_manifest_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &HARD_CLASS_RUN);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rounds = lines(&dir.path().join("transcript.jsonl"));
    assert_eq!(rounds.len(), 500);
    let hash = read_json(&dir.path().join("manifest.json"))["manifest_hash"].clone();
    assert!(hash.is_string());
    for (i, r) in rounds.iter().enumerate() {
        assert_eq!(r["t"], i + 1);
        assert_eq!(r["manifest_hash"], hash);
        for k in ["example", "tag", "sure", "output", "queries", "schema"] {
            assert!(r.get(k).is_some(), "round {} lacks {k}", i + 1);
        }
    }
    let verdict = read_json(&dir.path().join("verdict.json"));
    assert_eq!(verdict["manifest_hash"], hash);
    assert_eq!(verdict["verdicts"][0]["verdict"]["classification"], "success-at-horizon");
    assert_eq!(verdict["verdicts"][0]["verdict"]["rounds_played"], 500);
}

#[test]
fn same_manifest_twice_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_into(a.path(), &HARD_CLASS_RUN).status.success());
    assert!(run_into(b.path(), &HARD_CLASS_RUN).status.success());
    for f in ["transcript.jsonl", "verdict.json", "manifest.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn written_manifest_reproduces_the_run_as_config() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_into(a.path(), &HARD_CLASS_RUN).status.success());
    let cfg = a.path().join("manifest.json");
    // config keys override the conflicting flag
    let out = run_into(b.path(), &["--config", cfg.to_str().unwrap(), "--horizon", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["transcript.jsonl", "verdict.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn unknown_adversary_is_a_usage_error_naming_the_field() {
    let out = replaylab(&[
        "run", "--generator", "wp", "--adversary", "bogus", "--class", "nonuniform-hard", "--target",
        "member:index=6", "--horizon", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`adversary`"), "{err}");
}

#[test]
fn unknown_config_key_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    fs::write(&cfg, r#"{"generator":{"id":"wp"},"adversary":{"id":"fair"},"horizn":5}"#).unwrap();
    let out = replaylab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`horizn`"));
}

#[test]
fn illegal_example_exits_with_protocol_violation() {
    // the killer reveals 1, which is outside the all-markers member
    let out = replaylab(&[
        "run", "--generator", "wp", "--adversary", "nonuniform-killer:d=4", "--class", "marker-anchor",
        "--target", "member:index=1", "--horizon", "20",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("round 1"));
}

#[test]
fn assert_success_turns_a_failure_verdict_into_exit_1() {
    let args = [
        "run", "--generator", "wp", "--adversary", "nonuniform-killer:d=3", "--class", "nonuniform-hard",
        "--target", "member:index=2", "--horizon", "40",
    ];
    assert_eq!(replaylab(&args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--assert-success");
    assert_eq!(replaylab(&strict).status.code(), Some(1));
}

#[test]
fn trace_rejects_untraceable_generators() {
    let out = replaylab(&[
        "trace", "--generator", "echo", "--adversary", "fair", "--class", "uniform-pair", "--target",
        "member:index=1", "--horizon", "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`generator`"));
}

#[test]
fn trace_of_replay_heavy_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = replaylab(&[
        "trace", "--generator", "wp", "--adversary", "fair", "--class", "nonuniform-hard", "--target",
        "member:index=1", "--horizon", "200", "--inject-rate", "0.7", "--seed", "4", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = lines(&dir.path().join("trace.jsonl"));
    assert_eq!(trace.len(), 200);
    let mut seen = HashSet::new();
    let mut prev_sure = 0;
    for l in &trace {
        seen.insert(l["example"].as_str().unwrap().to_string());
        let sure = l["sure_size"].as_u64().unwrap() as usize;
        assert!(sure <= seen.len());
        assert!(sure >= prev_sure);
        prev_sure = sure;
        // legal run on a class containing the target: never an empty V_t
        assert!(!l["consistent"].as_array().unwrap().is_empty());
        assert!(l["critical"].is_u64());
    }
    assert!(prev_sure < seen.len(), "replays should keep S_t below the example count");
}

#[test]
fn grid_writes_csv_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let out = replaylab(&["grid", "--seeds", "2", "--horizon", "300", "--assert-match", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 13);
    assert!(rows[0].starts_with("notion,family,expected,observed"));
    let manifests = lines(&dir.path().join("grid-manifests.jsonl"));
    let hashes: HashSet<String> = manifests.iter().map(|m| m["manifest_hash"].as_str().unwrap().to_string()).collect();
    for row in &rows[1..] {
        for h in row.rsplit(',').next().unwrap().split(';').filter(|h| !h.is_empty()) {
            assert!(hashes.contains(h), "cell hash {h} has no manifest");
        }
    }
}
