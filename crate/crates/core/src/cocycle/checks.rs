use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rug::ops::Pow;
use rug::{Integer, Rational};

use super::cochain::Cochain;
use super::module::{Ctx, Elem, Grade, SampleFn};
use crate::error::{Error, Result};
use crate::forms::FormRef;
use crate::group::{Cusp, GroupElement};
use crate::hp::HPComplex;
use crate::iterated::{form_ids, lambda_completed, period_polynomial_at, Engine, Options, PeriodPolynomial};
use crate::report::{IdentityReport, RunInfo};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// exact-degree polynomials in τ; integral weights only
    Polynomial,
    /// values on τ-lists in H⁻
    Samples,
}

type Key = (Vec<String>, String);

/// Period integrals r_{f_1..f_n}(γ) as module elements, cached by forms and cusp.
pub struct Periods {
    pub engine: Arc<Engine>,
    pub opts: Options,
    pub mode: Mode,
    polys: Mutex<HashMap<Key, Arc<PeriodPolynomial>>>,
    funcs: Mutex<HashMap<Key, SampleFn>>,
}

impl Periods {
    pub fn new(engine: Arc<Engine>, mode: Mode, opts: Options) -> Arc<Periods> {
        Arc::new(Periods { engine, opts, mode, polys: Mutex::default(), funcs: Mutex::default() })
    }

    /// Expansion Σ 𝓛(a; n)(a − τ)^n about a = γ⁻¹∞.
    pub fn polynomial_at(&self, forms: &[FormRef], a: &Cusp) -> Result<Arc<PeriodPolynomial>> {
        let key = (form_ids(forms), a.to_string());
        if let Some(p) = self.polys.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(period_polynomial_at(&self.engine, forms, a, &self.opts)?);
        self.polys.lock().unwrap().insert(key, p.clone());
        Ok(p)
    }

    fn sample_fn(&self, forms: &[FormRef], a: &Cusp) -> SampleFn {
        let key = (form_ids(forms), a.to_string());
        let mut funcs = self.funcs.lock().unwrap();
        if let Some(f) = funcs.get(&key) {
            return f.clone();
        }
        let engine = self.engine.clone();
        let forms = forms.to_vec();
        let exps: Vec<_> = forms.iter().map(|f| f.weight().minus_two()).collect();
        let (a, opts) = (a.clone(), self.opts);
        let memo: Mutex<HashMap<String, Vec<HPComplex>>> = Mutex::default();
        let f: SampleFn = Arc::new(move |taus: &[HPComplex]| {
            let k = taus.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(";");
            if let Some(v) = memo.lock().unwrap().get(&k) {
                return Ok(v.clone());
            }
            let v = crate::iterated::rstar_at(&engine, &forms, &exps, &a, taus, &opts)?.value;
            memo.lock().unwrap().insert(k, v.clone());
            Ok(v)
        });
        funcs.insert(key, f.clone());
        f
    }

    /// r_{forms}(γ) in the mode of this collection.
    pub fn r(&self, forms: &[FormRef], g: &GroupElement) -> Result<Elem> {
        let grade = Grade::of(forms);
        if g.is_identity() {
            return Ok(Elem { grade, ..Elem::zero() });
        }
        let a = g.cusp_image();
        match self.mode {
            Mode::Polynomial => {
                let p = self.polynomial_at(forms, &a)?;
                Ok(Elem::poly(p.tau_coeffs(), grade))
            }
            Mode::Samples => Ok(Elem::func(self.sample_fn(forms, &a), grade)),
        }
    }

    /// γ ↦ r_{forms}(γ) as a 1-cochain.
    pub fn cochain(self: &Arc<Self>, forms: &[FormRef]) -> Cochain {
        let (me, forms) = (self.clone(), forms.to_vec());
        Cochain::new(1, Arc::new(move |gs| me.r(&forms, &gs[0]))).memoized()
    }

    fn info(&self) -> RunInfo {
        RunInfo { digits: self.engine.budget().digits, quad_level: self.engine.level(), seed: None, n_max: None }
    }
}

/// σ_j(γ) = Σ over ordered contiguous compositions (I_1, …, I_ℓ) of (j+1, …, n) of
/// (−1)^ℓ ∏_m r_{I_m}(γ⁻¹)∘γ; `j` is 1-based.
pub fn sigma_partition(periods: &Periods, ctx: &Ctx, forms: &[FormRef], j: usize, g: &GroupElement) -> Result<Elem> {
    let n = forms.len();
    if j == 0 || j >= n {
        return Err(Error::Argument(format!("σ_j needs 1 <= j <= n-1, got j={j}, n={n}")));
    }
    let tail = &forms[j..];
    let ginv = g.inv();
    composition_sum(ctx, tail.len(), |s, e| ctx.act(&periods.r(&tail[s..e], &ginv)?, g))
}

/// Σ over ordered contiguous compositions of 0..len of (−1)^ℓ ∏ block(start, end).
pub(crate) fn composition_sum(
    ctx: &Ctx,
    len: usize,
    mut block: impl FnMut(usize, usize) -> Result<Elem>,
) -> Result<Elem> {
    let mut blocks: HashMap<(usize, usize), Elem> = HashMap::new();
    let mut acc: Option<Elem> = None;
    // bit b of `cuts` set: a block ends after position b
    for cuts in 0u32..(1 << (len - 1)) {
        let mut start = 0;
        let mut prod: Option<Elem> = None;
        let mut ell = 0;
        for pos in 0..len {
            if pos + 1 == len || cuts & (1 << pos) != 0 {
                let key = (start, pos + 1);
                if !blocks.contains_key(&key) {
                    blocks.insert(key, block(start, pos + 1)?);
                }
                let b = &blocks[&key];
                prod = Some(match prod {
                    None => b.clone(),
                    Some(p) => ctx.mul(&p, b)?,
                });
                ell += 1;
                start = pos + 1;
            }
        }
        let mut term = prod.unwrap();
        if ell % 2 == 1 {
            term = ctx.scale(&term, -1);
        }
        acc = Some(match acc {
            None => term,
            Some(a) => ctx.add(&a, &term)?,
        });
    }
    Ok(acc.unwrap())
}

fn labels(n: usize, samples: bool) -> Vec<String> {
    (0..n).map(|k| if samples { format!("tau{k}") } else { format!("tau^{k}") }).collect()
}

/// Report on lhs = rhs; the residual is sup|lhs − rhs| over max(1, sup of every term).
#[allow(clippy::too_many_arguments)]
fn compare_report(
    ctx: &Ctx,
    identity: &str,
    depth: usize,
    level: i64,
    forms: Vec<String>,
    gammas: Vec<GroupElement>,
    lhs: &Elem,
    rhs: &Elem,
    terms: &[Elem],
    tolerance: f64,
    info: RunInfo,
) -> Result<IdentityReport> {
    let (l, r, samples) = ctx.compare(lhs, rhs)?;
    let mut scale: f64 = 1.0;
    for t in terms {
        for v in ctx.flatten(t, samples)? {
            scale = scale.max(v.abs_f64());
        }
    }
    let diff = l.iter().zip(&r).map(|(a, b)| (a - b).abs_f64()).fold(0.0, f64::max);
    let taus = if samples { ctx.taus.clone() } else { Vec::new() };
    Ok(IdentityReport::with_residual(
        identity,
        depth,
        level,
        forms,
        gammas,
        taus,
        labels(l.len(), samples),
        l,
        r,
        diff / scale,
        tolerance,
        info,
    ))
}

fn perturbed(ctx: &Ctx, a: Elem, perturb: f64) -> Elem {
    if perturb == 0.0 {
        return a;
    }
    ctx.scale_complex(&a, &HPComplex::from_f64(1.0 + perturb, 0.0, ctx.bits()))
}

fn level_of(forms: &[FormRef]) -> i64 {
    forms.iter().map(|f| f.level()).max().unwrap_or(1)
}

/// r(γ₁γ₂) − r(γ₁)∘γ₂ − r(γ₂) against Σ_j r_{f_1..f_j}(γ₁)∘γ₂ · σ_j(γ₂).
/// `perturb` scales r(γ₁γ₂) by 1 + perturb.
pub fn depth_cocycle_residual(
    periods: &Periods,
    ctx: &Ctx,
    forms: &[FormRef],
    g1: &GroupElement,
    g2: &GroupElement,
    tolerance: f64,
    perturb: f64,
) -> Result<IdentityReport> {
    let n = forms.len();
    let a = perturbed(ctx, periods.r(forms, &g1.mul(g2))?, perturb);
    let b = ctx.act(&periods.r(forms, g1)?, g2)?;
    let c = periods.r(forms, g2)?;
    let lhs = ctx.sub(&ctx.sub(&a, &b)?, &c)?;
    let mut terms = vec![a, b, c];
    let mut rhs = Elem { grade: Grade::of(forms), ..Elem::zero() };
    for j in 1..n {
        let left = ctx.act(&periods.r(&forms[..j], g1)?, g2)?;
        let t = ctx.mul(&left, &sigma_partition(periods, ctx, forms, j, g2)?)?;
        rhs = ctx.add(&rhs, &t)?;
        terms.push(t);
    }
    compare_report(
        ctx,
        &format!("cocycle{n}"),
        n,
        level_of(forms),
        form_ids(forms),
        vec![*g1, *g2],
        &lhs,
        &rhs,
        &terms,
        tolerance,
        periods.info(),
    )
}

/// r(γ) + r(γ⁻¹)∘γ, which vanishes for a 1-cocycle.
pub fn antisymmetry_residual(
    ctx: &Ctx,
    r: &Cochain,
    g: &GroupElement,
    tolerance: f64,
    info: RunInfo,
) -> Result<IdentityReport> {
    let a = r.at(&[*g])?;
    let b = ctx.act(&r.at(&[g.inv()])?, g)?;
    let lhs = ctx.add(&a, &b)?;
    let zero = Elem { grade: a.grade.clone(), ..Elem::zero() };
    compare_report(ctx, "antisym", 1, 1, vec![], vec![*g], &lhs, &zero, &[a, b], tolerance, info)
}

/// σ(γ₁γ₂) − σ(γ₁)∘γ₂ − σ(γ₂) against Σ ϱ(γ₁)∘γ₂ · φ(γ₂) over the lower data (ϱ, φ), per pair.
pub fn z1_depth_checker(
    ctx: &Ctx,
    candidate: &Cochain,
    lower: &[(Cochain, Cochain)],
    pairs: &[(GroupElement, GroupElement)],
    tolerance: f64,
    info: RunInfo,
) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::with_capacity(pairs.len());
    for (g1, g2) in pairs {
        let a = candidate.at(&[g1.mul(g2)])?;
        let b = ctx.act(&candidate.at(&[*g1])?, g2)?;
        let c = candidate.at(&[*g2])?;
        let lhs = ctx.sub(&ctx.sub(&a, &b)?, &c)?;
        let mut terms = vec![a, b, c];
        let mut rhs = Elem { grade: lhs.grade.clone(), ..Elem::zero() };
        for (rho, phi) in lower {
            let t = ctx.mul(&ctx.act(&rho.at(&[*g1])?, g2)?, &phi.at(&[*g2])?)?;
            rhs = ctx.add(&rhs, &t)?;
            terms.push(t);
        }
        out.push(compare_report(ctx, "z1", lower.len() + 1, 1, vec![], vec![*g1, *g2], &lhs, &rhs, &terms, tolerance, info.clone())?);
    }
    Ok(out)
}

fn pow_rational(x: &Rational, n: usize) -> Rational {
    let mut p = Rational::from(1);
    for _ in 0..n {
        p *= x;
    }
    p
}

/// The depth-two relation coefficient by coefficient in τ, followed by its
/// constant-term and leading-term specialisations at γ₁ = [[1,0],[N,1]], γ₂ = γ₁^k.
#[allow(clippy::too_many_arguments)]
pub fn lincomb_report(
    periods: &Periods,
    ctx: &Ctx,
    f1: &FormRef,
    f2: &FormRef,
    g1: &GroupElement,
    g2: &GroupElement,
    ks: &[i64],
    tolerance: f64,
    perturb: f64,
) -> Result<Vec<IdentityReport>> {
    if periods.mode != Mode::Polynomial {
        return Err(Error::Argument("lincomb needs polynomial mode".into()));
    }
    let pair = [f1.clone(), f2.clone()];
    let ids = form_ids(&pair);
    let level = level_of(&pair);
    let bits = ctx.bits();
    let mut out = Vec::new();

    let a = perturbed(ctx, periods.r(&pair, &g1.mul(g2))?, perturb);
    let b = ctx.act(&periods.r(&pair, g1)?, g2)?;
    let c = periods.r(&pair, g2)?;
    let lhs = ctx.sub(&ctx.sub(&a, &b)?, &c)?;
    let rhs = ctx.mul(&ctx.act(&periods.r(&pair[..1], g1)?, g2)?, &periods.r(&pair[1..], g2)?)?;
    let (l, r, _) = ctx.compare(&lhs, &rhs)?;
    let terms = [&a, &b, &c, &rhs].map(|t| ctx.flatten(t, false)).into_iter().collect::<Result<Vec<_>>>()?;
    for n in 0..l.len() {
        let scale = terms.iter().filter_map(|t| t.get(n)).map(|v| v.abs_f64()).fold(1.0, f64::max);
        let rep = IdentityReport::with_residual(
            "lincomb",
            2,
            level,
            ids.clone(),
            vec![*g1, *g2],
            vec![],
            vec![format!("tau^{n}")],
            vec![l[n].clone()],
            vec![r[n].clone()],
            (&l[n] - &r[n]).abs_f64() / scale,
            tolerance,
            periods.info(),
        );
        out.push(rep);
    }

    let n_level = level;
    let big_m = (f1.weight().minus_two().0 + f2.weight().minus_two().0) / 2;
    if big_m < 0 {
        return Err(Error::Argument("lincomb needs weights at least 2".into()));
    }
    let big_m = big_m as usize;
    for &k in ks {
        if k < 1 {
            return Err(Error::Argument(format!("specialisation needs k >= 1, got {k}")));
        }
        let h1 = GroupElement::v(n_level);
        let h2 = h1.pow(k);
        let nk = Integer::from(n_level * k);
        let a12 = Rational::from((-1, n_level * (k + 1)));
        let a1 = Rational::from((-1, n_level));
        let a2 = Rational::from((Integer::from(-1), nk.clone()));
        let l12 = periods.polynomial_at(&pair, &Cusp::Finite(a12.clone()))?;
        let l1 = periods.polynomial_at(&pair, &Cusp::Finite(a1.clone()))?;
        let l2 = periods.polynomial_at(&pair, &Cusp::Finite(a2.clone()))?;
        let scale_of = |v: &[HPComplex]| v.iter().map(|x| x.abs_f64()).fold(1.0, f64::max);

        // constant term
        let mut parts = Vec::new();
        let mut lhs0 = HPComplex::zero(bits);
        for n in 0..=big_m {
            let w = pow_rational(&a1, n);
            let t12 = l12.coeffs[n].mul_real(&rug::Float::with_val(bits, Rational::from(&w / pow_rational(&Rational::from(k + 1), n))));
            let t1 = l1.coeffs[n].mul_real(&rug::Float::with_val(bits, &w));
            let t2 = l2.coeffs[n].mul_real(&rug::Float::with_val(bits, Rational::from(&w / pow_rational(&Rational::from(k), n))));
            lhs0 = &(&(&lhs0 + &t12) - &t1) - &t2;
            parts.extend([t12, t1, t2]);
        }
        if perturb != 0.0 {
            lhs0 = &lhs0 * &HPComplex::from_f64(1.0 + perturb, 0.0, bits);
        }
        let p1 = periods.polynomial_at(&pair[..1], &Cusp::Finite(a1.clone()))?;
        let p2 = periods.polynomial_at(&pair[1..], &Cusp::Finite(a2.clone()))?;
        let zero = HPComplex::zero(bits);
        let rhs0 = &p1.eval(&zero) * &p2.eval(&zero);
        parts.push(rhs0.clone());
        out.push(
            IdentityReport::with_residual(
                "lincomb-const",
                2,
                level,
                ids.clone(),
                vec![h1, h2],
                vec![],
                vec![format!("k={k}")],
                vec![lhs0.clone()],
                vec![rhs0.clone()],
                (&lhs0 - &rhs0).abs_f64() / scale_of(&parts),
                tolerance,
                periods.info(),
            )
            .with_note(format!("gamma2 = gamma1^{k}")),
        );

        // leading term
        let mut parts = vec![l12.coeffs[big_m].clone(), l2.coeffs[big_m].clone()];
        let mut mid = HPComplex::zero(bits);
        for n in 0..=big_m {
            let mut w = Integer::from(-k - 1).pow(n as u32);
            w *= Integer::from(nk.clone().pow((big_m - n) as u32));
            let t = l1.coeffs[n].mul_integer(&w);
            mid += &t;
            parts.push(t);
        }
        let mut lhs1 = &(&l12.coeffs[big_m] - &mid) - &l2.coeffs[big_m];
        if perturb != 0.0 {
            lhs1 = &lhs1 * &HPComplex::from_f64(1.0 + perturb, 0.0, bits);
        }
        let lam = |f: &FormRef, a: &Rational| {
            lambda_completed(&periods.engine, std::slice::from_ref(f), &Cusp::Finite(a.clone()), &[1], &periods.opts)
                .map(|v| v.value)
        };
        let rhs1 = &(&lam(f1, &a12)? - &lam(f1, &a2)?) * &lam(f2, &a2)?;
        parts.push(rhs1.clone());
        out.push(
            IdentityReport::with_residual(
                "lincomb-lead",
                2,
                level,
                ids.clone(),
                vec![h1, h2],
                vec![],
                vec![format!("k={k}")],
                vec![lhs1.clone()],
                vec![rhs1.clone()],
                (&lhs1 - &rhs1).abs_f64() / scale_of(&parts),
                tolerance,
                periods.info(),
            )
            .with_note(format!("gamma2 = gamma1^{k}")),
        );
    }
    Ok(out)
}
