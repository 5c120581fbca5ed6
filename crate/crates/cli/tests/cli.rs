use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn run_env(args: &[&str], digits: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_periodlab"));
    c.args(args).env_remove("PERIODLAB_DIGITS");
    if let Some(d) = digits {
        c.env("PERIODLAB_DIGITS", d);
    }
    c.output().expect("spawn periodlab")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn lvalue_of_zero_form() {
    let out = run(&["lvalue", "--form", "zero", "--s", "4", "--digits", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"]["re"], "0");
    assert_eq!(v["value"]["im"], "0");
    assert_eq!(v["digits"], 20);
}

#[test]
fn lvalue_for_delta_with_series() {
    let out = run(&["lvalue", "--form", "delta", "--basepoint", "1/3", "--s", "14", "--digits", "20", "--n-terms", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["basepoint"], "1/3");
    assert!(v["series"]["tail"].is_string());
    let csv = run(&["lvalue", "--form", "delta", "--s", "14", "--digits", "20", "--format", "csv"]);
    assert!(stdout(&csv).starts_with("forms,basepoint,s,re,im,err\ndelta,0,14,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["lvalue", "--form", "delta"]).status.code(), Some(2));
    assert_eq!(run(&["lvalue", "--form", "eta", "--s", "3"]).status.code(), Some(2));
    assert_eq!(run(&["lvalue", "--form", "delta", "--s", "3", "--basepoint", "inf"]).status.code(), Some(2));
    assert_eq!(run(&["check", "cocycle2", "--forms", "delta"]).status.code(), Some(2));
    assert_eq!(run(&["check", "bkm", "--tau", "0.1+0.5i", "--digits", "15"]).status.code(), Some(2));
    assert_eq!(run(&["check", "mellin", "--digits", "15"]).status.code(), Some(2));
    assert_eq!(run(&["check", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["check", "cocycle1", "--digits", "12"]).status.code(), Some(2));
    assert_eq!(run_env(&["check", "cocycle1"], Some("10")).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three() {
    // s = 1 leaves no convergent bound for the Dirichlet tail of Δ
    let out = run(&["check", "mellin", "--s", "1", "--digits", "15"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn digits_from_environment_and_seed_in_config() {
    let out = run_env(&["check", "cocycle1", "--pairs", "2", "--seed", "4"], Some("18"));
    assert_eq!(out.status.code(), Some(0));
    for r in json(&out).as_array().unwrap() {
        assert_eq!(r["config"]["digits"], 18);
        assert_eq!(r["config"]["seed"], 4);
        assert!(r["config"]["quad_level"].as_u64().unwrap() >= 1);
        assert!(r["seconds"].is_null());
    }
    let flag = run_env(&["check", "cocycle1", "--pairs", "1", "--digits", "16"], Some("18"));
    assert_eq!(json(&flag)[0]["config"]["digits"], 16);
}

#[test]
fn csv_layout_and_timing() {
    let out = run(&["check", "cocycle1", "--pairs", "2", "--digits", "20", "--format", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "identity,depth,level,gamma1,gamma2,residual,tolerance,pass,seconds");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("cocycle1,1,1,\"") && lines[1].ends_with(",true,NA"));
    let timed = run(&["check", "cocycle1", "--pairs", "1", "--digits", "20", "--format", "csv", "--timing"]);
    assert!(!stdout(&timed).lines().nth(1).unwrap().ends_with("NA"));
}

#[test]
fn failing_identity_prints_residuals() {
    let out = run(&["check", "cocycle1", "--pairs", "2", "--digits", "20", "--perturb", "1e-6"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("FAIL cocycle1") && err.contains("residual"));
    assert!(json(&out).as_array().unwrap().iter().all(|r| r["pass"] == false));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["check", "bkm", "--pairs", "1", "--digits", "20", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v[0]["identity"], "bkm");
    assert_eq!(v[0]["taus"].as_array().unwrap().len(), 3);
}

#[test]
fn suite_below_pinned_precision_skips_rows() {
    let out = run(&["suite", "--digits", "15"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ends_with(",skipped,NA")), "{text}");
}

#[test]
fn suite_lists_rows_and_reads_manifests() {
    let list = run(&["suite", "--list"]);
    let rows = json(&list);
    assert!(rows.as_array().unwrap().iter().any(|r| r["id"] == "cocycle3-delta"));

    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    std::fs::write(
        &manifest,
        r#"[{"id": "small", "identity": "cocycle1", "pairs": 2, "digits": 20, "tolerance": 1e-12},
            {"id": "theta", "identity": "bkm", "forms": ["theta:1:2"], "level": 8, "pairs": 1, "max_len": 2, "digits": 20}]"#,
    )
    .unwrap();
    let jd = dir.path().join("json");
    let out = run(&["suite", "--manifest", manifest.to_str().unwrap(), "--digits", "20", "--json-dir", jd.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 4);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(jd.join("theta.json")).unwrap()).unwrap();
    assert_eq!(v["reports"][0]["level"], 8);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"[{"id": "x", "identity": "cocycle1", "pairz": 2}]"#).unwrap();
    assert_eq!(run(&["suite", "--manifest", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["suite", "--only", "nope"]).status.code(), Some(2));
}

#[test]
fn suite_negative_control_fails() {
    let out = run(&["suite", "--only", "bkm-theta", "--perturb", "1e-6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).lines().skip(1).all(|r| r.contains(",false,")));
}
