//! The ten acceptance criteria, run through the `periodlab` binary.
//! Prints one line per criterion and exits non-zero if any fails.

use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn periodlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_periodlab"))
        .args(args)
        .env_remove("PERIODLAB_DIGITS")
        .output()
        .expect("spawn periodlab")
}

/// Runs a check expecting exit 0; returns the parsed reports.
fn passing(args: &[&str]) -> Result<Vec<Value>, String> {
    let out = periodlab(args);
    let code = out.status.code();
    if code != Some(0) {
        return Err(format!("exit {code:?}: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let reps = v.as_array().cloned().ok_or("expected a JSON array")?;
    if let Some(bad) = reps.iter().find(|r| r["pass"] != Value::Bool(true)) {
        return Err(format!("report not passing: {bad}"));
    }
    Ok(reps)
}

fn max_residual(reps: &[Value]) -> f64 {
    reps.iter().filter_map(|r| r["residual"].as_str()?.parse::<f64>().ok()).fold(0.0, f64::max)
}

fn expect_count(reps: &[Value], identity: &str, n: usize) -> Result<(), String> {
    let got = reps.iter().filter(|r| r["identity"] == identity).count();
    if got != n {
        return Err(format!("{got} {identity} reports, expected {n}"));
    }
    Ok(())
}

type Criterion = (&'static str, fn() -> Result<String, String>);

fn c1() -> Result<String, String> {
    let reps = passing(&["check", "cocycle1", "--pairs", "20", "--max-len", "6", "--seed", "1", "--digits", "40", "--tolerance", "1e-30"])?;
    expect_count(&reps, "cocycle1", 20)?;
    Ok(format!("20 pairs, max residual {:.2e} <= 1e-30", max_residual(&reps)))
}

fn c2() -> Result<String, String> {
    let reps = passing(&["check", "cocycle2", "--pairs", "10", "--max-len", "4", "--seed", "1", "--digits", "40", "--tolerance", "1e-20"])?;
    expect_count(&reps, "cocycle2", 10)?;
    Ok(format!("10 pairs, max residual {:.2e} <= 1e-20", max_residual(&reps)))
}

fn c3() -> Result<String, String> {
    let reps = passing(&["check", "lincomb", "--pairs", "1", "--max-len", "4", "--ks", "1,2", "--digits", "40", "--tolerance", "1e-20"])?;
    expect_count(&reps, "lincomb", 21)?;
    expect_count(&reps, "lincomb-const", 2)?;
    expect_count(&reps, "lincomb-lead", 2)?;
    Ok(format!("21 coefficients + 4 specialisations, max residual {:.2e} <= 1e-20", max_residual(&reps)))
}

fn c4() -> Result<String, String> {
    let one = passing(&["check", "mellin", "--forms", "delta", "--s", "15", "--digits", "40", "--tolerance", "1e-25"])?;
    let two = passing(&["check", "mellin", "--forms", "delta,delta", "--s", "15,15", "--digits", "40", "--tolerance", "1e-15"])?;
    Ok(format!("depth 1 {:.2e} <= 1e-25, depth 2 {:.2e} <= 1e-15", max_residual(&one), max_residual(&two)))
}

fn c5() -> Result<String, String> {
    let one = passing(&["check", "route", "--forms", "delta", "--pairs", "3", "--max-len", "4", "--digits", "40", "--tolerance", "1e-18"])?;
    let two = passing(&["check", "route", "--forms", "delta,delta", "--pairs", "1", "--max-len", "3", "--digits", "40", "--tolerance", "1e-18"])?;
    if one.iter().chain(&two).any(|r| r["taus"].as_array().map(|t| t.len()) != Some(5)) {
        return Err("expected 5 sample points per report".into());
    }
    Ok(format!("depth 1 {:.2e}, depth 2 {:.2e} <= 1e-18", max_residual(&one), max_residual(&two)))
}

const TAUS: [&str; 6] = ["--tau", "-0.3-0.8i", "--tau", "0.45-1.2i", "--tau", "-0.2-1.1i"];

fn with_taus<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(&TAUS);
    v
}

fn c6() -> Result<String, String> {
    let d = passing(&with_taus(&["check", "bkm", "--forms", "delta", "--pairs", "10", "--max-len", "4", "--digits", "40", "--tolerance", "1e-25"]))?;
    expect_count(&d, "bkm", 10)?;
    let th = passing(&with_taus(&[
        "check", "bkm", "--forms", "theta:1:2", "--level", "8", "--pairs", "3", "--max-len", "2", "--digits", "30", "--tolerance", "1e-12",
    ]))?;
    Ok(format!("delta {:.2e} <= 1e-25, theta {:.2e} <= 1e-12", max_residual(&d), max_residual(&th)))
}

fn c7() -> Result<String, String> {
    let d = passing(&with_taus(&["check", "fin0", "--forms", "delta,delta", "--pairs", "3", "--max-len", "3", "--digits", "30", "--tolerance", "1e-15"]))?;
    let th = passing(&with_taus(&[
        "check", "fin0", "--forms", "theta:1:2,theta:1:2", "--level", "8", "--pairs", "2", "--max-len", "2", "--digits", "30", "--tolerance", "1e-8",
    ]))?;
    Ok(format!("delta {:.2e} <= 1e-15, theta {:.2e} <= 1e-8", max_residual(&d), max_residual(&th)))
}

fn c8() -> Result<String, String> {
    let reps = passing(&["check", "cocycle3", "--pairs", "3", "--max-len", "3", "--seed", "6", "--digits", "25", "--tolerance", "1e-8"])?;
    expect_count(&reps, "cocycle3", 3)?;
    Ok(format!("3 pairs on 7 samples, max residual {:.2e} <= 1e-8", max_residual(&reps)))
}

fn c9() -> Result<String, String> {
    let runs: [&[&str]; 9] = [
        &["check", "cocycle1", "--pairs", "3", "--digits", "40", "--tolerance", "1e-30"],
        &["check", "cocycle2", "--pairs", "2", "--max-len", "3", "--digits", "30", "--tolerance", "1e-15"],
        &["check", "cocycle3", "--pairs", "1", "--max-len", "3", "--seed", "6", "--digits", "20", "--tolerance", "1e-8"],
        &["check", "lincomb", "--pairs", "1", "--max-len", "3", "--digits", "30", "--tolerance", "1e-15"],
        &["check", "mellin", "--forms", "delta", "--s", "15", "--digits", "40", "--tolerance", "1e-25"],
        &["check", "route", "--forms", "delta", "--pairs", "2", "--digits", "40", "--tolerance", "1e-18"],
        &["check", "bkm", "--forms", "delta", "--pairs", "2", "--digits", "40", "--tolerance", "1e-25"],
        &["check", "bkm", "--forms", "theta:1:2", "--level", "8", "--pairs", "1", "--max-len", "2", "--digits", "30", "--tolerance", "1e-12"],
        &["check", "fin0", "--forms", "delta,delta", "--pairs", "1", "--max-len", "3", "--digits", "30", "--tolerance", "1e-15"],
    ];
    for args in runs {
        let mut a = args.to_vec();
        a.extend_from_slice(&["--perturb", "1e-6", "--format", "csv"]);
        let out = periodlab(&a);
        if out.status.code() != Some(1) {
            return Err(format!("{} with --perturb 1e-6 exited {:?}", args[1], out.status.code()));
        }
    }
    Ok(format!("{} perturbed runs all exit 1", runs.len()))
}

fn c10() -> Result<String, String> {
    let runs: [&[&str]; 3] = [
        &["check", "cocycle1", "--pairs", "5", "--seed", "9", "--digits", "40"],
        &["check", "bkm", "--forms", "theta:1:2", "--level", "8", "--pairs", "2", "--max-len", "2", "--digits", "30"],
        &["check", "lincomb", "--pairs", "1", "--max-len", "3", "--digits", "20"],
    ];
    for args in runs {
        for fmt in ["json", "csv"] {
            let mut a = args.to_vec();
            a.extend_from_slice(&["--format", fmt]);
            let (x, y) = (periodlab(&a), periodlab(&a));
            if x.stdout.is_empty() || x.stdout != y.stdout || x.status.code() != y.status.code() {
                return Err(format!("{} {fmt}: outputs differ between runs", args[1]));
            }
        }
    }
    Ok("JSON and CSV byte-identical across reruns".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("depth-1 cocycle relation", c1),
        ("depth-2 cocycle relation", c2),
        ("coefficient identities and specialisations", c3),
        ("completed L-series against the Dirichlet series", c4),
        ("period polynomial against direct integration", c5),
        ("Eichler integral transformation", c6),
        ("depth-2 Eichler integral transformation", c7),
        ("depth-3 cocycle relation", c8),
        ("negative controls", c9),
        ("determinism", c10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let tag = format!("criterion {}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| tag.ends_with(&format!(" {f}")) || name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let res = run();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS {tag:<12} {name}: {msg} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {tag:<12} {name}: {msg} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
