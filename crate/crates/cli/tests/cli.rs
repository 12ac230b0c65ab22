use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const PRESETS: [&str; 4] = ["M1", "M3", "MF", "relativistic-massive"];
const COMMANDS: [&str; 7] = ["classify", "bottom", "scan", "eigs", "oracle", "asymptotics", "oneboson"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinboson")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Asserts a failed run with the given exit code and a one-line JSON error.
fn assert_error(out: &Output, code: i32) -> Value {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    let v: Value = serde_json::from_str(err.trim_end()).unwrap();
    assert!(v["error"].is_string() && v["message"].is_string());
    v
}

#[test]
fn every_command_on_every_preset() {
    for model in PRESETS {
        for cmd in COMMANDS {
            for alpha in ["0.1", "1"] {
                let out = run(&[cmd, "--model", model, "--alpha", alpha]);
                assert!(
                    out.status.success(),
                    "{cmd} {model} α={alpha}: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
                let v = json_stdout(&out);
                assert_eq!(v["schema_version"], 1);
                assert_eq!(v["command"], cmd);
            }
        }
    }
}

#[test]
fn output_files_are_byte_identical() {
    let cases: [&[&str]; 4] = [
        &["scan", "--model", "M3", "--alpha-grid", "0.1:3:6log", "--format", "csv"],
        &["eigs", "--model", "M1", "--alpha", "1"],
        &["oracle", "--model", "MF", "--alpha", "1", "--format", "csv"],
        &["fuzz-inequality", "--seed", "7", "--count", "2000"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let paths = [scratch(&format!("det-{i}-a")), scratch(&format!("det-{i}-b"))];
        for p in &paths {
            let mut a = args.to_vec();
            a.extend(["--out", p.to_str().unwrap()]);
            let out = run(&a);
            assert!(out.status.success(), "{args:?}");
            assert!(out.stdout.is_empty());
        }
        let (a, b) = (std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn csv_scan_layout() {
    let out = run(&["scan", "--model", "M1", "--alpha-grid", "0.5:2:4lin", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap(), vec!["alpha", "E_plus", "E_minus", "E", "ess_bottom"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let alphas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(alphas, vec![0.5, 1.0, 1.5, 2.0]);
    for row in &rows {
        for cell in row.iter() {
            // 17 significant digits in scientific form
            let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
        }
        let e_plus: f64 = row[1].parse().unwrap();
        assert!(e_plus < -1.0);
    }
}

#[test]
fn bottom_reports_closed_form_regime() {
    let v = json_stdout(&run(&["bottom", "--model", "M1", "--alpha", "0.001"]));
    let ess = &v["rows"][0]["essential_spectrum"];
    let e = ess["energy"]["energy"].as_f64().unwrap();
    assert!((e + 1.0 + 1e-6 * 2.0 * 1.5f64.ln()).abs() < 1e-12, "{e}");
}

#[test]
fn classify_reports_critical_coupling() {
    let v = json_stdout(&run(&["classify", "--model", "M3", "--alpha-grid", "0.1:1:2log"]));
    let a = v["alpha_critical"].as_f64().unwrap();
    assert!((a - std::f64::consts::PI.sqrt().recip()).abs() < 1e-10);
    assert_eq!(v["rows"][0]["case"], "Case2b");
    assert_eq!(v["rows"][1]["case"], "Case2a");
}

#[test]
fn fuzz_summary() {
    let v = json_stdout(&run(&["fuzz-inequality", "--count", "5000", "--seed", "3"]));
    assert_eq!(v["passed"], true);
    assert_eq!(v["result"]["count"], 5000);
}

#[test]
fn model_file_overrides_presets() {
    let path = scratch("model.json");
    let spec = r#"{
        "name": "box3",
        "dimension": 3,
        "epsilon": 1.0,
        "omega": { "kind": "abs" },
        "lambda": { "kind": "box", "support_radius": 1.0 },
        "integrability": "case2-integrable"
    }"#;
    std::fs::write(&path, spec).unwrap();
    let from_file = json_stdout(&run(&["classify", "--model", path.to_str().unwrap()]));
    let preset = json_stdout(&run(&["classify", "--model", "M3"]));
    assert_eq!(from_file["model"], "box3");
    assert_eq!(from_file["alpha_critical"], preset["alpha_critical"]);
}

#[test]
fn validation_errors_exit_with_two() {
    assert_error(&run(&["bottom", "--alpha", "-1"]), 2);
    assert_error(&run(&["bottom"]), 2);
    assert_error(&run(&["scan", "--alpha-grid", "2:1:3log"]), 2);
    assert_error(&run(&["scan", "--alpha-grid", "nonsense"]), 2);
    assert_error(&run(&["bottom", "--alpha", "1", "--tol", "0"]), 2);
    assert_error(&run(&["bottom", "--alpha", "1", "--model", "/nonexistent/model.json"]), 2);
    let v = assert_error(&run(&["frobnicate"]), 2);
    assert_eq!(v["error"], "UsageError");

    let bad = scratch("bad-model.json");
    std::fs::write(&bad, r#"{"name": "x", "dimension": 0}"#).unwrap();
    assert_error(&run(&["classify", "--model", bad.to_str().unwrap()]), 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    // Φ is still negative at the largest bracket this far out
    let v = assert_error(&run(&["bottom", "--model", "M1", "--alpha", "1e300"]), 3);
    assert_eq!(v["error"], "BracketFailure");
}

#[test]
fn help_succeeds() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("oneboson"));
}
