//! Eichler integrals on the lower half-plane and the transformation laws
//! relating them to period integrals.
//!
//! For τ ∈ H⁻ the path runs straight up from τ̄, where w − τ = i(u + 2|Im τ|)
//! has argument π/2 throughout, so principal powers are continuous along it.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::FormRef;
use crate::group::GroupElement;
use crate::hp::{cpow_half, HPComplex};
use crate::iterated::{check_depth, form_ids, refine, rstar, Engine, Line, Options, SampleKernel};
use crate::report::{fmt_sci, scaled_residual, IdentityReport, RunInfo};

#[derive(Clone, Debug)]
pub struct EichlerValue {
    pub forms: Vec<String>,
    /// Im τ < 0
    pub tau: HPComplex,
    pub value: HPComplex,
    pub err: f64,
    pub digits: u32,
    pub quad_level: u32,
}

impl EichlerValue {
    pub fn to_json(&self) -> Value {
        let d = self.digits as usize;
        let (tr, ti) = self.tau.to_strings(d);
        let (re, im) = self.value.to_strings(d);
        json!({
            "forms": self.forms,
            "tau": {"re": tr, "im": ti},
            "value": {"re": re, "im": im},
            "err": fmt_sci(self.err),
            "digits": self.digits,
            "quad_level": self.quad_level,
        })
    }
}

fn lower(tau: &HPComplex) -> Result<()> {
    if !tau.im.is_sign_negative() || tau.im.is_zero() {
        return Err(Error::Domain(format!("Eichler integrals need Im τ < 0, got {}", tau)));
    }
    Ok(())
}

/// ∫_{τ̄}^{i∞} ∫_{w_1}^{i∞} … ∏ f_j(w_j)(w_j − τ)^{k_j−2} dw_r … dw_1.
pub fn eichler_nested(engine: &Engine, forms: &[FormRef], tau: &HPComplex, opts: &Options) -> Result<EichlerValue> {
    check_depth(forms, opts)?;
    lower(tau)?;
    let bits = engine.bits();
    let tau = tau.clone().with_prec(bits + 32);
    let mut out = EichlerValue {
        forms: form_ids(forms),
        tau: tau.clone().with_prec(bits),
        value: HPComplex::zero(bits),
        err: 0.0,
        digits: engine.budget().digits,
        quad_level: engine.level(),
    };
    if forms.iter().any(|f| f.is_zero()) {
        return Ok(out);
    }
    let line = Line::Point(tau.conj());
    let kernel = SampleKernel {
        base: line.base(bits + 32),
        taus: vec![tau],
        twice_exps: forms.iter().map(|f| f.weight().minus_two().0).collect(),
        bits,
    };
    let (n, level) = refine(engine, opts.max_refine, |e| {
        let n = e.nested(&line, forms, &kernel)?;
        let (err, scale) = (n.err[0], n.value[0].abs_f64());
        Ok((n, err, scale))
    })?;
    out.value = n.value[0].clone();
    out.err = n.err[0];
    out.quad_level = level;
    Ok(out)
}

/// I_f(τ) = ∫_{τ̄}^{i∞} f(w)(w − τ)^{k−2} dw.
pub fn eichler_i(engine: &Engine, f: &FormRef, tau: &HPComplex, opts: &Options) -> Result<EichlerValue> {
    eichler_nested(engine, std::slice::from_ref(f), tau, opts)
}

/// I_{f_1,f_2}(τ), the depth-two nested integral.
pub fn eichler_i2(engine: &Engine, f1: &FormRef, f2: &FormRef, tau: &HPComplex, opts: &Options) -> Result<EichlerValue> {
    eichler_nested(engine, &[f1.clone(), f2.clone()], tau, opts)
}

/// (F|γ)(τ) = χ(γ)⁻¹ j(γ,τ)^{Σ(k_j−2)} F(γτ) for the product weight of `forms`.
fn slash_factor(engine: &Engine, forms: &[FormRef], g: &GroupElement, tau: &HPComplex) -> Result<HPComplex> {
    let budget = engine.budget();
    let mut chi = HPComplex::one(engine.bits());
    for f in forms {
        chi = &chi * &f.multiplier(g, budget)?;
    }
    let twice: i64 = forms.iter().map(|f| f.weight().minus_two().0).sum();
    let j = g.jfactor(tau)?;
    cpow_half(&j, twice)?.div(&chi)
}

fn slashed(engine: &Engine, forms: &[FormRef], g: &GroupElement, tau: &HPComplex, opts: &Options) -> Result<HPComplex> {
    let gt = g.act(tau)?;
    let v = eichler_nested(engine, forms, &gt, opts)?;
    Ok(&slash_factor(engine, forms, g, tau)? * &v.value)
}

fn exps(forms: &[FormRef]) -> Vec<crate::group::Weight> {
    forms.iter().map(|f| f.weight().minus_two()).collect()
}

fn perturbed(v: HPComplex, perturb: f64) -> HPComplex {
    if perturb == 0.0 {
        return v;
    }
    let bits = v.prec();
    &v * &HPComplex::from_f64(1.0 + perturb, 0.0, bits)
}

fn sample_labels(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("tau{k}")).collect()
}

fn info(engine: &Engine) -> RunInfo {
    RunInfo { digits: engine.budget().digits, quad_level: engine.level(), seed: None, n_max: None }
}

/// I_f(τ) − (I_f|γ)(τ) against r_f(γ)(τ) at each τ ∈ H⁻.
#[allow(clippy::too_many_arguments)]
pub fn bkm_residual(
    engine: &Engine,
    f: &FormRef,
    g: &GroupElement,
    taus: &[HPComplex],
    tolerance: f64,
    perturb: f64,
    opts: &Options,
) -> Result<IdentityReport> {
    let forms = std::slice::from_ref(f);
    let bits = engine.bits();
    let mut lhs = Vec::with_capacity(taus.len());
    if g.is_identity() || f.is_zero() {
        lhs = vec![HPComplex::zero(bits); taus.len()];
    } else {
        for t in taus {
            let i = eichler_i(engine, f, t, opts)?.value;
            lhs.push(perturbed(&i - &slashed(engine, forms, g, t, opts)?, perturb));
        }
    }
    let rhs = rstar(engine, forms, &exps(forms), g, taus, opts)?.value;
    let residual = scaled_residual(&lhs, &rhs);
    Ok(IdentityReport::with_residual(
        "bkm",
        1,
        f.level(),
        form_ids(forms),
        vec![*g],
        taus.to_vec(),
        sample_labels(taus.len()),
        lhs,
        rhs,
        residual,
        tolerance,
        info(engine),
    ))
}

/// (I_{f1,f2}|γ − I_{f1,f2})(τ) against −r_{f1,f2}(γ) + r_{f1}(γ)·r_{f2}(γ) − r_{f2}(γ)·I_{f1}.
#[allow(clippy::too_many_arguments)]
pub fn fin0_residual(
    engine: &Engine,
    f1: &FormRef,
    f2: &FormRef,
    g: &GroupElement,
    taus: &[HPComplex],
    tolerance: f64,
    perturb: f64,
    opts: &Options,
) -> Result<IdentityReport> {
    let pair = [f1.clone(), f2.clone()];
    let bits = engine.bits();
    let n = taus.len();
    let (lhs, rhs) = if g.is_identity() || f1.is_zero() || f2.is_zero() {
        (vec![HPComplex::zero(bits); n], vec![HPComplex::zero(bits); n])
    } else {
        let r12 = rstar(engine, &pair, &exps(&pair), g, taus, opts)?.value;
        let r1 = rstar(engine, &pair[..1], &exps(&pair[..1]), g, taus, opts)?.value;
        let r2 = rstar(engine, &pair[1..], &exps(&pair[1..]), g, taus, opts)?.value;
        let mut lhs = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for (k, t) in taus.iter().enumerate() {
            let i12 = eichler_nested(engine, &pair, t, opts)?.value;
            let i1 = eichler_i(engine, f1, t, opts)?.value;
            lhs.push(perturbed(&slashed(engine, &pair, g, t, opts)? - &i12, perturb));
            let v = &(&r1[k] * &r2[k]) - &r12[k];
            rhs.push(&v - &(&r2[k] * &i1));
        }
        (lhs, rhs)
    };
    let residual = scaled_residual(&lhs, &rhs);
    Ok(IdentityReport::with_residual(
        "fin0",
        2,
        f1.level().max(f2.level()),
        form_ids(&pair),
        vec![*g],
        taus.to_vec(),
        sample_labels(n),
        lhs,
        rhs,
        residual,
        tolerance,
        info(engine),
    ))
}
