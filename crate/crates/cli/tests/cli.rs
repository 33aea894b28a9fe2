use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_diagforge"))
        .args(args)
        .env_remove("DIAGFORGE_MAX_DIM")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("output is JSON")
}

fn error_kind(out: &Output) -> String {
    json(&out.stderr)["error"]["kind"].as_str().unwrap().to_string()
}

const SYNTH_DISCRETE: &str = r#"{
  "spectrum": {"finite_eigs": [], "essential": [[0,0],[1,0],[0,1]]},
  "target": {"head": [[0.5,0.5]], "tail_pattern": [[0.25,0.25],[0.5,0]]}
}"#;

#[test]
fn flatten_gives_constant_diagonal() {
    let out = run(&["flatten"], r#"{"diagonal": [[1,0],[0,1],[-1,0],[0,-1]]}"#);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-12);
    for z in v["diagonal"].as_array().unwrap() {
        assert!(z[0].as_f64().unwrap().abs() < 1e-12 && z[1].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn output_is_byte_deterministic() {
    let args = ["carpenter", "block", "--alpha", "0.3,0.7", "--beta", "0.45,0.55", "--eps", "0.05"];
    let a = run(&args, "");
    let b = run(&args, "");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let arveson = ["obstruct", "arveson", "--restarts", "4", "--iters", "100", "--seed", "7"];
    assert_eq!(run(&arveson, "").stdout, run(&arveson, "").stdout);
}

#[test]
fn floats_reparse_to_the_same_report() {
    let out = run(&["carpenter", "block", "--alpha", "0.3,0.7", "--beta", "0.45,0.55"], "");
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    // Re-serializing through serde_json keeps every float bit-identical.
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    assert!(text.contains("e-1"), "floats are in scientific notation");
}

#[test]
fn synthesized_unitary_verifies() {
    let out = run(&["synth", "discrete", "--eps", "0.05"], SYNTH_DISCRETE);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let artifact = String::from_utf8(out.stdout).unwrap();
    let fam = run(&["verify", "family"], &artifact);
    assert_eq!(fam.status.code(), Some(0), "{}", String::from_utf8_lossy(&fam.stderr));
    assert_eq!(json(&fam.stdout)["report"]["pass"], Value::Bool(true));
    let nec = run(&["verify", "necessity"], &artifact);
    assert_eq!(nec.status.code(), Some(0));
    assert_eq!(json(&nec.stdout)["holds"], Value::Bool(true));
}

#[test]
fn necessity_violation_exits_four() {
    let out = run(&["verify", "necessity"], r#"{"diagonal": [[2,0]], "spectrum": [[0,0],[1,0]]}"#);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_kind(&out), "VerificationFailed");
}

#[test]
fn infeasible_system_exits_two_with_certificate() {
    let input = r#"{"spectrum":{"values":[[0,0],[1,0]],"weights":["1/2","1/2"]},"blocks":[{"value":[2,0],"weight":"1"}]}"#;
    let out = run(&["feasibility"], input);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out.stdout);
    assert_eq!(v["feasible"], Value::Bool(false));
    assert!(v["certificate"]["dual"].is_array());
    let sq = run(&["obstruct", "square"], "");
    assert_eq!(sq.status.code(), Some(2));
    assert_eq!(json(&sq.stdout)["certificate_valid"], Value::Bool(true));
}

#[test]
fn bad_input_exits_three() {
    let out = run(&["flatten"], "not json");
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stderr)["exit_code"], 3);
    let non_normal = run(&["flatten"], r#"{"matrix": [[[0,0],[1,0]],[[0,0],[0,0]]]}"#);
    assert_eq!(non_normal.status.code(), Some(3));
    assert_eq!(error_kind(&non_normal), "NotNormal");
    let eps = run(&["carpenter", "block", "--alpha", "1", "--beta", "1", "--eps", "-1"], "");
    assert_eq!(eps.status.code(), Some(3));
}

#[test]
fn dimension_cap_exits_four() {
    let input = r#"{"columns": [[0.3333333333333333],[0.6666666666666667]]}"#;
    let out = run(&["carpenter", "uhf", "--eps", "1e-6", "--max-dim", "8"], input);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("diagforge-{}-{name}", std::process::id()))
}

#[test]
fn flatten_reads_input_file() {
    let input = temp_path("n.json");
    let report = temp_path("flat.json");
    std::fs::write(&input, r#"{"diagonal": [[0,0],[1,0],[0,1]]}"#).unwrap();
    let out = run(&["flatten", "--input", input.to_str().unwrap(), "--output", report.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v = json(&std::fs::read(&report).unwrap());
    for z in v["diagonal"].as_array().unwrap() {
        assert!((z[0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((z[1].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
    let _ = std::fs::remove_file(input);
    let _ = std::fs::remove_file(report);
}

#[test]
fn block_family_passes_verify() {
    let out = run(&["carpenter", "block", "--alpha", "0.3,0.7", "--beta", "0.5,0.5", "--eps", "0.05"], "");
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert!(v["report"]["diag_residual"].as_f64().unwrap() < 0.05);
    let check = run(&["verify", "family"], &String::from_utf8(out.stdout).unwrap());
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
}

#[test]
fn tracial_synthesis_artifact_verifies() {
    let input = r#"{"spectrum": {"values": [[0,0],[1,0],[0,1]], "weights": ["1/3","1/3","1/3"]},
        "blocks": [{"value": [0.5,0], "weight": "1/3"}, {"value": [0,0.5], "weight": "1/3"}, {"value": [0.5,0.5], "weight": "1/3"}]}"#;
    let out = run(&["synth", "tracial", "--eps", "0.02"], input);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let artifact = String::from_utf8(out.stdout).unwrap();
    for sub in ["family", "necessity"] {
        let check = run(&["verify", sub], &artifact);
        assert_eq!(check.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&check.stderr));
    }
}
