use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;
use toric_lambda::io::{parse_fan, print_fan};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_toric-lambda"));
    cmd.args(args).env_remove("TORIC_LAMBDA_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn construct(dir: &Path, name: &str, family: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["construct"];
    args.extend_from_slice(family);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let r = run(&args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    path
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn constructed_fans_validate_and_round_trip() {
    let dir = TempDir::new().unwrap();
    for family in [
        &["pn", "3"][..],
        &["product", "1", "2"],
        &["blowup-point", "4", "2"],
        &["blowup-linear", "3", "1"],
        &["hirzebruch", "3"],
    ] {
        let printed = run(&[&["construct"][..], family].concat());
        assert_eq!(printed.code, 0, "{family:?}: {}", printed.stderr);
        let fan = parse_fan(&printed.stdout).unwrap();
        assert_eq!(print_fan(&fan), printed.stdout);

        let path = construct(dir.path(), "fan.json", family);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), printed.stdout);
        let r = run(&["validate", s(&path)]);
        assert_eq!(r.code, 0, "{family:?}: {}", r.stdout);
        assert_eq!(r.stdout.lines().filter(|l| l.ends_with(": pass")).count(), 6);
    }
}

#[test]
fn validate_names_first_failing_flag() {
    let dir = TempDir::new().unwrap();
    let not_smooth = write(
        dir.path(),
        "a.json",
        r#"{"rank": 2, "rays": [[1, 0], [1, 2], [-1, -1]], "max_cones": [[0, 1], [1, 2], [0, 2]]}"#,
    );
    let r = run(&["validate", s(&not_smooth)]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("smooth: fail"), "{}", r.stdout);
    assert!(r.stderr.contains("smooth: fail"), "{}", r.stderr);

    let duplicate = write(
        dir.path(),
        "b.json",
        r#"{"rank": 1, "rays": [[1], [1], [-1]], "max_cones": [[0], [1], [2]]}"#,
    );
    let r = run(&["validate", s(&duplicate)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("duplicate ray"), "{}", r.stderr);

    let incomplete = write(
        dir.path(),
        "c.json",
        r#"{"rank": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "max_cones": [[0, 1], [1, 2]]}"#,
    );
    let r = run(&["validate", s(&incomplete), "--format", "structured"]);
    assert_eq!(r.code, 1);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    let complete = doc["validation"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == "complete")
        .unwrap();
    assert_eq!(complete["passed"], false);
}

#[test]
fn parse_errors_are_refusals_with_location() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{\n  \"rank\": 2,\n  \"rays\": [[1, 0],, ]\n}");
    let r = run(&["validate", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);

    let r = run(&["analyze", s(&dir.path().join("missing.json"))]);
    assert_eq!(r.code, 1);
}

#[test]
fn analyze_worked_example() {
    let dir = TempDir::new().unwrap();
    let path = construct(dir.path(), "bl.json", &["blowup-linear", "3", "1"]);
    let r = run(&["analyze", s(&path), "--format", "structured"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["schema"], "toric-lambda.report/1");
    assert_eq!(doc["tool_version"], env!("CARGO_PKG_VERSION"));
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(std::fs::read(&path).unwrap())));
    assert_eq!(doc["input_digest"], Value::String(digest));
    assert_eq!(doc["walls"].as_array().unwrap().len(), 9);

    let verdicts = doc["verdicts"].as_array().unwrap();
    let table: Vec<(bool, bool)> = verdicts
        .iter()
        .map(|v| (v["ample"].as_bool().unwrap(), v["nef"].as_bool().unwrap()))
        .collect();
    assert_eq!(table, [(false, false), (false, false), (true, true)]);
    let witness = &verdicts[1]["witness"];
    assert_eq!(witness["min_degree"], -1);
    assert_eq!(witness["inequality"], "b-sum");
    let coords = witness["wall_coordinates"].as_array().unwrap();
    assert!(coords.contains(&serde_json::json!([-1, -1, 0])), "{witness}");

    let single = run(&["analyze", s(&path), "--m", "3", "--format", "structured"]);
    let doc: Value = serde_json::from_str(&single.stdout).unwrap();
    assert_eq!(doc["verdicts"].as_array().unwrap().len(), 1);
    assert_eq!(doc["verdicts"][0]["ample"], true);
}

#[test]
fn analyze_rejects_bad_power() {
    let dir = TempDir::new().unwrap();
    let path = construct(dir.path(), "p2.json", &["pn", "2"]);
    assert_eq!(run(&["analyze", s(&path), "--m", "3"]).code, 2);
    assert_eq!(run(&["analyze", s(&path), "--m", "0"]).code, 2);
    assert_eq!(run(&["analyze", s(&path), "--m", "x"]).code, 2);
    assert_eq!(run(&["analyze", s(&path), "--format", "yaml"]).code, 2);
    assert_eq!(run(&["analyze", s(&path), "--m", "all"]).code, 0);
}

#[test]
fn structured_output_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let path = construct(dir.path(), "bp.json", &["blowup-point", "4", "3"]);
    for cmd in ["analyze", "contractions"] {
        let one = run_env(&[cmd, s(&path), "--format", "structured"], &[("TORIC_LAMBDA_THREADS", "1")]);
        let many = run_env(&[cmd, s(&path), "--format", "structured"], &[("TORIC_LAMBDA_THREADS", "4")]);
        let default = run(&[cmd, s(&path), "--format", "structured"]);
        assert_eq!(one.code, 0, "{}", one.stderr);
        assert_eq!(one.stdout, many.stdout);
        assert_eq!(one.stdout, default.stdout);
    }
    let r = run_env(&["analyze", s(&path)], &[("TORIC_LAMBDA_THREADS", "zero")]);
    assert_eq!(r.code, 2);
}

#[test]
fn contractions_report() {
    let dir = TempDir::new().unwrap();
    let path = construct(dir.path(), "bl.json", &["blowup-linear", "3", "1"]);
    let r = run(&["contractions", s(&path), "--format", "structured"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    let walls = doc["walls"].as_array().unwrap();
    let all_ones = walls.iter().find(|w| w["b"] == serde_json::json!([1, 1])).unwrap();
    assert_eq!(all_ones["extremal"], false);

    let contractions = doc["contractions"].as_array().unwrap();
    assert_eq!(contractions.len(), 2);
    let div = contractions.iter().find(|c| c["kind"] == "divisorial").unwrap();
    assert_eq!(div["class"], serde_json::json!([0, 0, 1, 1, -1]));
    assert_eq!(div["fiber_dim"], 1);
    assert_eq!(div["image_of_exceptional_dim"], 1);
    assert_eq!(div["antican_degree"], 1);
    let lengths = doc["length_check"].as_array().unwrap();
    assert!(lengths.iter().all(|l| l.get("violation").is_none()));

    let table = run(&["contractions", s(&path)]);
    assert!(table.stdout.contains("not extremal"));
    assert!(table.stdout.contains("divisorial"));
}

#[test]
fn classify_outcomes_and_refusals() {
    let dir = TempDir::new().unwrap();
    let bp = construct(dir.path(), "bp.json", &["blowup-point", "3"]);
    let r = run(&["classify", s(&bp), "--mode", "lambda2-nef", "--format", "structured"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["classification"]["outcome"], "blowup_of_Pn_at_point");
    assert_eq!(doc["classification"]["chain"].as_array().unwrap().len(), 1);
    assert_eq!(doc["classification"]["terminal_fan"]["rays"].as_array().unwrap().len(), 4);

    let prod = construct(dir.path(), "prod.json", &["product", "1", "2"]);
    let r = run(&["classify", s(&prod), "--mode", "lambda2-nef"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("tangent_nef"));

    let line = construct(dir.path(), "bl.json", &["blowup-linear", "3", "1"]);
    let r = run(&["classify", s(&line), "--mode", "lambda2-nef"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("b-sum = -1"), "{}", r.stderr);
    assert!(r.stderr.contains("wall ["), "{}", r.stderr);

    let f1 = construct(dir.path(), "f1.json", &["hirzebruch", "1"]);
    assert_eq!(run(&["classify", s(&f1), "--mode", "lambda2-nef"]).code, 1);
    assert_eq!(run(&["classify", s(&f1), "--mode", "lambda9"]).code, 2);
    assert_eq!(run(&["classify", s(&f1)]).code, 2);
}

#[test]
fn construct_usage_errors() {
    assert_eq!(run(&["construct", "pn", "0"]).code, 2);
    assert_eq!(run(&["construct", "blowup-linear", "3", "2"]).code, 2);
    assert_eq!(run(&["construct", "cubic", "3"]).code, 2);
    assert_eq!(run(&["construct", "hirzebruch", "-1"]).code, 2);
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["--version"]).code, 0);
}
