use std::sync::Arc;
use std::time::Instant;

use periodlab::cocycle::{self, default_taus, depth_cocycle_residual, lincomb_report, Ctx, Elem, Mode, Periods};
use periodlab::eichler::{bkm_residual, fin0_residual};
use periodlab::group::{random_nontrivial, random_pairs};
use periodlab::iterated::{lambda_completed, mellin_identity_residual, multiple_l_partial, route_residual, Options};
use periodlab::report::fmt_sci;
use periodlab::{Cusp, Engine, Error, Form, FormRef, HPComplex, IdentityReport, PrecisionBudget};
use serde_json::{json, Value};

use crate::args::{CheckOpts, Identity, LvalueArgs, ModeArg};

pub const DEFAULT_DIGITS: u32 = 30;

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Fail {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        if e.is_usage() {
            Fail::Usage(e.to_string())
        } else {
            Fail::Numeric(e.to_string())
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Fail>;

fn budget(digits: Option<u32>, quad_level: Option<u32>) -> Outcome<PrecisionBudget> {
    let b = PrecisionBudget::new(digits.unwrap_or(DEFAULT_DIGITS))?;
    Ok(match quad_level {
        Some(q) => b.with_quad_level(q),
        None => b,
    })
}

fn load_forms(specs: &[String], bits: u32) -> Outcome<Vec<FormRef>> {
    specs.iter().map(|s| Ok(Arc::new(Form::from_spec(s, bits)?))).collect()
}

fn parse_taus(specs: &[String], bits: u32) -> Outcome<Vec<HPComplex>> {
    let taus = specs.iter().map(|s| HPComplex::parse(s, bits)).collect::<periodlab::Result<Vec<_>>>()?;
    if let Some(t) = taus.iter().find(|t| !t.im.is_sign_negative() || t.im.is_zero()) {
        return Err(Fail::Usage(format!("sample points must lie in the lower half-plane, got {t}")));
    }
    Ok(taus)
}

fn basepoint(s: &str) -> Outcome<rug::Rational> {
    match s.parse::<Cusp>()? {
        Cusp::Finite(q) => Ok(q),
        Cusp::Infinity => Err(Fail::Usage("the basepoint must be a rational number".into())),
    }
}

pub fn lvalue(a: &LvalueArgs) -> Outcome<Value> {
    let b = budget(a.digits, a.quad_level)?;
    let engine = Engine::new(b);
    let forms = load_forms(&a.forms, engine.bits())?;
    let q = basepoint(&a.basepoint)?;
    let v = lambda_completed(&engine, &forms, &Cusp::Finite(q.clone()), &a.s, &Options::default())?;
    let mut out = v.to_json();
    if let Some(n) = a.n_terms {
        let p = multiple_l_partial(&forms, &q, &a.s, n, engine.bits())?;
        let (re, im) = p.value.to_strings(v.digits as usize);
        out["series"] = json!({
            "value": {"re": re, "im": im},
            "tail": fmt_sci(p.tail),
            "n_terms": p.n_terms,
        });
    }
    Ok(out)
}

pub fn depth_of(id: Identity) -> usize {
    match id {
        Identity::Cocycle1 | Identity::Bkm | Identity::Mellin | Identity::Route => 1,
        Identity::Cocycle2 | Identity::Fin0 | Identity::Lincomb => 2,
        Identity::Cocycle3 => 3,
    }
}

/// Tolerance used when none is given, as a power of ten of the working digits.
pub fn default_tolerance(id: Identity, digits: u32, integral: bool, depth: usize) -> f64 {
    let d = digits as f64;
    let e = match id {
        Identity::Cocycle1 => d - 10.0,
        Identity::Cocycle2 | Identity::Lincomb => d / 2.0,
        Identity::Cocycle3 => d / 3.0,
        Identity::Mellin if depth == 1 => d * 5.0 / 8.0,
        Identity::Mellin => d * 3.0 / 8.0,
        Identity::Route => d / 2.0,
        Identity::Bkm if integral => d - 15.0,
        Identity::Bkm => d * 2.0 / 5.0,
        Identity::Fin0 if integral => d / 2.0,
        Identity::Fin0 => d * 4.0 / 15.0,
    };
    10f64.powf(-e.floor())
}

/// Reports of one checker run, in input order.
pub fn check(id: Identity, o: &CheckOpts, timing: bool) -> Outcome<Vec<IdentityReport>> {
    let b = budget(o.digits, o.quad_level)?;
    let digits = b.digits;
    let engine = Arc::new(Engine::new(b.clone()));
    let bits = engine.bits();
    let specs = if o.forms.is_empty() { vec!["delta".to_string(); depth_of(id)] } else { o.forms.clone() };
    let forms = load_forms(&specs, bits)?;
    let want = depth_of(id);
    if !matches!(id, Identity::Mellin | Identity::Route) && forms.len() != want {
        return Err(Fail::Usage(format!("{} needs {want} form(s), got {}", id.name(), forms.len())));
    }
    let integral = forms.iter().all(|f| f.weight().is_integral());
    let level = o.level.unwrap_or_else(|| forms.iter().map(|f| f.level()).max().unwrap_or(1));
    if level < 1 {
        return Err(Fail::Usage(format!("level must be positive, got {level}")));
    }
    let tol = o.tolerance.unwrap_or_else(|| default_tolerance(id, digits, integral, forms.len()));
    let opts = Options::default();
    let taus = if o.taus.is_empty() {
        let n = match id {
            Identity::Bkm | Identity::Fin0 => 3,
            Identity::Route => 5,
            _ => 7,
        };
        default_taus(bits).into_iter().take(n).collect()
    } else {
        parse_taus(&o.taus, bits)?
    };
    let ctx = Arc::new(Ctx::new(b).with_taus(taus.clone()));
    let mut out = Vec::new();
    let mut push = |mut r: IdentityReport, started: Instant| {
        r.info.seed = Some(o.seed);
        if timing {
            r.seconds = Some(started.elapsed().as_secs_f64());
        }
        out.push(r);
    };

    match id {
        Identity::Cocycle1 | Identity::Cocycle2 | Identity::Cocycle3 => {
            let mode = match o.mode {
                Some(ModeArg::Poly) => Mode::Polynomial,
                Some(ModeArg::Samples) => Mode::Samples,
                None if integral && forms.len() <= 2 => Mode::Polynomial,
                None => Mode::Samples,
            };
            let periods = Periods::new(engine.clone(), mode, opts);
            for (g1, g2) in random_pairs(level, o.max_len, o.seed, o.pairs) {
                let t = Instant::now();
                let r = depth_cocycle_residual(&periods, &ctx, &forms, &g1, &g2, tol, o.perturb)?;
                push(r, t);
                if o.compare_sigma && forms.len() >= 3 {
                    compare_sigma(&periods, &ctx, &forms, &g2)?;
                }
            }
        }
        Identity::Lincomb => {
            let periods = Periods::new(engine.clone(), Mode::Polynomial, opts);
            for (k, (g1, g2)) in random_pairs(level, o.max_len, o.seed, o.pairs).into_iter().enumerate() {
                let t = Instant::now();
                let ks: &[i64] = if k == 0 { &o.ks } else { &[] };
                for r in lincomb_report(&periods, &ctx, &forms[0], &forms[1], &g1, &g2, ks, tol, o.perturb)? {
                    push(r, t);
                }
            }
        }
        Identity::Bkm | Identity::Fin0 | Identity::Route => {
            for g in random_nontrivial(level, o.max_len, o.seed, o.pairs) {
                let t = Instant::now();
                let r = match id {
                    Identity::Bkm => bkm_residual(&engine, &forms[0], &g, &taus, tol, o.perturb, &opts)?,
                    Identity::Fin0 => fin0_residual(&engine, &forms[0], &forms[1], &g, &taus, tol, o.perturb, &opts)?,
                    _ => route_residual(&engine, &forms, &g, &taus, tol, o.perturb, &opts)?,
                };
                push(r, t);
            }
        }
        Identity::Mellin => {
            if o.s.is_empty() {
                return Err(Fail::Usage("mellin needs --s".into()));
            }
            let a = basepoint(o.basepoint.as_deref().unwrap_or("0"))?;
            let t = Instant::now();
            push(mellin_identity_residual(&engine, &forms, &a, &o.s, tol, o.perturb, &opts)?, t);
        }
    }
    Ok(out)
}

/// σ_j(γ) against the candidate closed form −r_{f_{j+1}..f_n}(γ⁻¹)∘γ, printed to stderr.
fn compare_sigma(periods: &Periods, ctx: &Ctx, forms: &[FormRef], g: &periodlab::GroupElement) -> Outcome<()> {
    for j in 1..forms.len() {
        let s = cocycle::sigma_partition(periods, ctx, forms, j, g)?;
        let closed: Elem = ctx.scale(&ctx.act(&periods.r(&forms[j..], &g.inv())?, g)?, -1);
        let (l, r, _) = ctx.compare(&s, &closed)?;
        let scale = r.iter().map(|v| v.abs_f64()).fold(1.0, f64::max);
        let diff = l.iter().zip(&r).map(|(a, b)| (a - b).abs_f64()).fold(0.0, f64::max);
        eprintln!("sigma_{j}({g}) vs -r(g^-1)|g: {}", fmt_sci(diff / scale));
    }
    Ok(())
}
