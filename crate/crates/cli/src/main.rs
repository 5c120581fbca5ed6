mod args;
mod run;
mod suite;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use periodlab::report::{fmt_sci, CSV_HEADER};
use periodlab::IdentityReport;
use serde_json::{json, Value};

use args::{Cli, Command, Format, Output, SuiteArgs};
use run::{Fail, Outcome};

const PASS: u8 = 0;
const IDENTITY_FAILED: u8 = 1;
const USAGE: u8 = 2;
const NUMERIC: u8 = 3;

fn write_out(out: &Output, text: &str) -> Outcome<()> {
    write_to(out.output.as_deref(), text)
}

fn write_to(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Fail::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Fail::Numeric(e.to_string()))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn reports_csv(reports: &[IdentityReport]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn report_failures(reports: &[IdentityReport]) {
    for r in reports.iter().filter(|r| !r.pass) {
        let gs: Vec<String> = r.gammas.iter().map(|g| g.to_string()).collect();
        eprintln!(
            "FAIL {} [{}] {}: residual {} > tolerance {}",
            r.identity,
            gs.join(" "),
            r.labels.first().map(String::as_str).unwrap_or(""),
            fmt_sci(r.residual),
            fmt_sci(r.tolerance)
        );
    }
}

fn cmd_lvalue(a: &args::LvalueArgs) -> Outcome<u8> {
    let v = run::lvalue(a)?;
    let text = match a.out.format {
        Format::Json => pretty(&v),
        Format::Csv => {
            let s = v["s"].as_array().map(|x| x.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));
            format!(
                "forms,basepoint,s,re,im,err\n{},{},{},{},{},{}\n",
                v["forms"].as_array().map(|x| x.iter().filter_map(|f| f.as_str()).collect::<Vec<_>>().join(" ")).unwrap_or_default(),
                v["basepoint"].as_str().unwrap_or(""),
                s.unwrap_or_default(),
                v["value"]["re"].as_str().unwrap_or(""),
                v["value"]["im"].as_str().unwrap_or(""),
                v["err"].as_str().unwrap_or("")
            )
        }
    };
    write_out(&a.out, &text)?;
    Ok(PASS)
}

fn cmd_check(a: &args::CheckArgs) -> Outcome<u8> {
    let reports = run::check(a.identity, &a.opts, a.out.timing)?;
    let text = match a.out.format {
        Format::Json => pretty(&Value::Array(reports.iter().map(|r| r.to_json()).collect())),
        Format::Csv => reports_csv(&reports),
    };
    write_out(&a.out, &text)?;
    report_failures(&reports);
    Ok(if reports.iter().all(|r| r.pass) { PASS } else { IDENTITY_FAILED })
}

fn load_rows(a: &SuiteArgs) -> Outcome<Vec<suite::Row>> {
    let mut rows = match &a.manifest {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", p.display())))?;
            let bad = |e: String| Fail::Usage(format!("bad manifest {}: {e}", p.display()));
            let list: Vec<Value> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            list.into_iter().map(suite::Row::from_json).collect::<Result<Vec<_>, _>>().map_err(bad)?
        }
        None => suite::default_rows(),
    };
    if !a.only.is_empty() {
        if let Some(bad) = a.only.iter().find(|id| !rows.iter().any(|r: &suite::Row| &r.id == *id)) {
            return Err(Fail::Usage(format!("no suite row named '{bad}'")));
        }
        rows.retain(|r| a.only.contains(&r.id));
    }
    for r in &mut rows {
        if let Some(s) = a.seed {
            r.opts.seed = s;
        }
        if a.perturb != 0.0 {
            r.opts.perturb = a.perturb;
        }
    }
    Ok(rows)
}

fn skipped_row(r: &suite::Row, status: &str) -> String {
    let tol = r.opts.tolerance.map(fmt_sci).unwrap_or_else(|| "NA".into());
    format!("{},{},{},,,NA,{tol},{status},NA\n", r.identity.name(), run::depth_of(r.identity), r.opts.level.unwrap_or(1))
}

fn cmd_suite(a: &SuiteArgs) -> Outcome<u8> {
    let rows = load_rows(a)?;
    if a.list {
        let text = pretty(&serde_json::to_value(&rows).expect("rows"));
        write_to(a.output.as_deref(), &text)?;
        return Ok(PASS);
    }
    if let Some(d) = &a.json_dir {
        std::fs::create_dir_all(d).map_err(|e| Fail::Usage(format!("cannot create {}: {e}", d.display())))?;
    }
    let mut csv = format!("{CSV_HEADER}\n");
    let mut code = PASS;
    for r in &rows {
        let pinned = r.opts.digits.unwrap_or(run::DEFAULT_DIGITS);
        if pinned > a.digits {
            eprintln!("skip {}: needs {pinned} digits, ceiling is {}", r.id, a.digits);
            csv.push_str(&skipped_row(r, "skipped"));
            continue;
        }
        let started = Instant::now();
        let status = match run::check(r.identity, &r.opts, a.timing) {
            Ok(reps) => {
                for rep in &reps {
                    csv.push_str(&rep.csv_row());
                    csv.push('\n');
                }
                report_failures(&reps);
                let pass = reps.iter().all(|x| x.pass);
                if !pass && code == PASS {
                    code = IDENTITY_FAILED;
                }
                if let Some(d) = &a.json_dir {
                    let v = json!({"row": r.id, "reports": reps.iter().map(|x| x.to_json()).collect::<Vec<_>>()});
                    write_to(Some(&d.join(format!("{}.json", r.id))), &pretty(&v))?;
                }
                if pass { "pass" } else { "FAIL" }
            }
            Err(Fail::Usage(m)) => return Err(Fail::Usage(format!("row {}: {m}", r.id))),
            Err(Fail::Numeric(m)) => {
                eprintln!("error in {}: {m}", r.id);
                csv.push_str(&skipped_row(r, "error"));
                code = NUMERIC;
                "error"
            }
        };
        if a.timing {
            eprintln!("{} {status} ({:.1}s)", r.id, started.elapsed().as_secs_f64());
        } else {
            eprintln!("{} {status}", r.id);
        }
    }
    write_to(a.output.as_deref(), &csv)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Lvalue(a) => cmd_lvalue(a),
        Command::Check(a) => cmd_check(a),
        Command::Suite(a) => cmd_suite(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(USAGE)
        }
        Err(Fail::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(NUMERIC)
        }
    }
}
