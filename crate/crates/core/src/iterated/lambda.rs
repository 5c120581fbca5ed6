use std::collections::HashMap;

use rug::{Float, Integer, Rational};

use super::grid::{Engine, Line, PowerKernel};
use super::{check_depth, form_ids, refine, LambdaValue, Options};
use crate::error::{Error, Result};
use crate::forms::FormRef;
use crate::group::Cusp;
use crate::hp::{gamma_int, pi, HPComplex};
use crate::report::{IdentityReport, RunInfo};

/// Λ(a; n_1+1, …, n_r+1) for every n_j < widths[j], row-major in (n_1, …, n_r).
#[derive(Clone, Debug)]
pub struct LambdaTable {
    pub widths: Vec<usize>,
    pub values: Vec<HPComplex>,
    pub err: Vec<f64>,
    pub quad_level: u32,
}

impl LambdaTable {
    pub fn index(&self, n: &[usize]) -> usize {
        n.iter().zip(&self.widths).fold(0, |acc, (i, w)| acc * w + i)
    }

    pub fn get(&self, n: &[usize]) -> &HPComplex {
        &self.values[self.index(n)]
    }

    pub fn err_at(&self, n: &[usize]) -> f64 {
        self.err[self.index(n)]
    }

    pub fn max_err(&self) -> f64 {
        self.err.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn lambda_table(
    engine: &Engine,
    forms: &[FormRef],
    basepoint: &Cusp,
    widths: &[usize],
    opts: &Options,
) -> Result<LambdaTable> {
    check_depth(forms, opts)?;
    if widths.len() != forms.len() || widths.iter().any(|w| *w == 0) {
        return Err(Error::Argument("one positive width per form is required".into()));
    }
    let len: usize = widths.iter().product();
    let bits = engine.bits();
    let a = match basepoint {
        // coincident endpoints
        Cusp::Infinity => {
            return Ok(LambdaTable {
                widths: widths.to_vec(),
                values: vec![HPComplex::zero(bits); len],
                err: vec![0.0; len],
                quad_level: engine.level(),
            })
        }
        Cusp::Finite(a) => a.clone(),
    };
    let line = Line::Cusp(a);
    let kernel = PowerKernel { widths: widths.to_vec(), bits };
    let (nested, level) = refine(engine, opts.max_refine, |e| {
        let n = e.nested(&line, forms, &kernel)?;
        let scale = n.value.iter().map(|v| v.abs_f64()).fold(0.0, f64::max);
        let err = n.err.iter().cloned().fold(0.0, f64::max);
        Ok((n, err, scale))
    })?;
    Ok(LambdaTable { widths: widths.to_vec(), values: nested.value, err: nested.err, quad_level: level })
}

/// Λ_{f_1,…,f_r}(a; s_1,…,s_r) along the vertical lines above a.
pub fn lambda_completed(
    engine: &Engine,
    forms: &[FormRef],
    basepoint: &Cusp,
    s: &[i64],
    opts: &Options,
) -> Result<LambdaValue> {
    check_depth(forms, opts)?;
    if s.len() != forms.len() {
        return Err(Error::Argument(format!("{} forms but {} exponents", forms.len(), s.len())));
    }
    if let Some(bad) = s.iter().find(|x| **x < 1) {
        return Err(Error::Argument(format!("s_j must be positive integers, got {bad}")));
    }
    let widths: Vec<usize> = s.iter().map(|x| *x as usize).collect();
    let table = lambda_table(engine, forms, basepoint, &widths, opts)?;
    let idx: Vec<usize> = s.iter().map(|x| *x as usize - 1).collect();
    Ok(LambdaValue {
        forms: form_ids(forms),
        basepoint: basepoint.clone(),
        s: s.to_vec(),
        value: table.get(&idx).clone(),
        err: table.err_at(&idx),
        digits: engine.budget().digits,
        quad_level: table.quad_level,
    })
}

/// Γ(s_1)⋯Γ(s_r)/(−2πi)^{s_1+…+s_r}.
pub fn gamma_factor(s: &[i64], bits: u32) -> Result<HPComplex> {
    let mut g = HPComplex::one(bits);
    for x in s {
        g = &g * &gamma_int(*x, bits)?;
    }
    let total: i64 = s.iter().sum();
    let m2pii = HPComplex::new(Float::new(bits), Float::with_val(bits, pi(bits) * -2i32));
    g.div(&m2pii.powi(total)?)
}

#[derive(Clone, Debug)]
pub struct PartialL {
    pub value: HPComplex,
    /// rigorous bound on the omitted terms
    pub tail: f64,
    /// exponents up to this value were summed
    pub n_terms: f64,
}

struct TailModel {
    /// Σ_{ν > N} C ν^{−β}, up to the factor N^{1−β}
    t: Vec<f64>,
    /// Σ_ν C ν^{−β} over all ν
    f: Vec<f64>,
    beta: Vec<f64>,
}

impl TailModel {
    fn new(forms: &[FormRef], s: &[i64]) -> Result<TailModel> {
        let mut m = TailModel { t: Vec::new(), f: Vec::new(), beta: Vec::new() };
        for (f, sj) in forms.iter().zip(s) {
            let q = f.qexp();
            let beta = *sj as f64 - q.bound.alpha;
            if beta <= 1.0 {
                return Err(Error::Divergent(format!(
                    "{}: s = {sj} with coefficient growth ν^{} leaves no convergent tail bound",
                    f.id(),
                    q.bound.alpha
                )));
            }
            let d = q.den as f64;
            m.t.push(q.bound.c * d / (beta - 1.0));
            m.f.push(q.bound.c * d.powf(beta) * beta / (beta - 1.0));
            m.beta.push(beta);
        }
        Ok(m)
    }

    fn tail(&self, n: f64) -> f64 {
        let r = self.t.len();
        let mut total = 0.0;
        for j in 0..r {
            let mut term = self.t[j] * n.powf(1.0 - self.beta[j]);
            for l in 0..r {
                if l != j {
                    term *= self.f[l];
                }
            }
            total += term;
        }
        total
    }
}

/// Smallest power-of-two cutoff whose tail bound is at most `target`.
pub fn partial_terms_for(forms: &[FormRef], s: &[i64], target: f64) -> Result<f64> {
    let m = TailModel::new(forms, s)?;
    let mut n = 16.0;
    while m.tail(n) > target {
        n *= 2.0;
        if n > 1e9 {
            return Err(Error::Divergent(format!("tail bound {target:e} needs more than 1e9 terms")));
        }
    }
    Ok(n)
}

/// Σ c_1(ν_1)⋯c_r(ν_r) e^{2πi(ν_1+…+ν_r)a} / ((ν_1+…+ν_r)^{s_1}⋯ν_r^{s_r}) over ν_j ≤ n_terms.
pub fn multiple_l_partial(forms: &[FormRef], a: &Rational, s: &[i64], n_terms: f64, bits: u32) -> Result<PartialL> {
    if forms.is_empty() || forms.len() != s.len() {
        return Err(Error::Argument("one exponent per form is required".into()));
    }
    if forms.iter().any(|f| f.is_zero()) {
        return Ok(PartialL { value: HPComplex::zero(bits), tail: 0.0, n_terms });
    }
    let model = TailModel::new(forms, s)?;
    let tail = model.tail(n_terms);
    for f in forms {
        f.ensure_coefficients(n_terms)?;
    }
    let r = forms.len();
    let qs: Vec<_> = forms.iter().map(|f| f.qexp()).collect();
    let den = qs.iter().fold(Integer::from(1), |acc, q| acc.lcm(&Integer::from(q.den))).to_u64().unwrap();
    // (numerator over den, coefficient) with ν ≤ n_terms
    let terms: Vec<Vec<(u64, &HPComplex)>> = qs
        .iter()
        .map(|q| {
            let scale = den / q.den;
            q.terms
                .iter()
                .map(|t| (t.num * scale, &t.coeff))
                .take_while(|(n, _)| (*n as f64) <= n_terms * den as f64)
                .collect()
        })
        .collect();
    let work = bits + 16;
    let mut pows: Vec<HashMap<u64, HPComplex>> = vec![HashMap::new(); r];
    let den_f = Float::with_val(work, den);
    let mut inv_pow = |j: usize, m: u64| -> HPComplex {
        pows[j]
            .entry(m)
            .or_insert_with(|| {
                let nu = Float::with_val(work, m) / &den_f;
                let p = Float::with_val(work, rug::ops::Pow::pow(nu, -s[j]));
                HPComplex::from_real(p)
            })
            .clone()
    };
    // e^{2πi m a/den}, with the angle reduced exactly
    let p = a.numer().clone();
    let q = Integer::from(a.denom() * den);
    let two_pi = Float::with_val(work, pi(work) * 2u32);
    let mut twists: HashMap<Integer, HPComplex> = HashMap::new();
    let mut twist = |m: u64| -> HPComplex {
        let res = rug::ops::RemRounding::rem_euc(Integer::from(&p * m), &q);
        twists
            .entry(res.clone())
            .or_insert_with(|| {
                let ang = Float::with_val(work, &two_pi * &res) / &q;
                HPComplex::cis(&ang)
            })
            .clone()
    };
    let mut acc = HPComplex::zero(work);
    let mut stack: Vec<(usize, u64, HPComplex)> = vec![(r, 0, HPComplex::one(work))];
    // depth-first over suffixes (ν_j, …, ν_r)
    while let Some((j, suffix, prod)) = stack.pop() {
        if j == 0 {
            acc.add_mul(&prod, &twist(suffix));
            continue;
        }
        let jj = j - 1;
        for (num, c) in &terms[jj] {
            let m = suffix + num;
            let v = &(&prod * *c) * &inv_pow(jj, m);
            stack.push((jj, m, v));
        }
    }
    Ok(PartialL { value: acc.with_prec(bits), tail, n_terms })
}

/// Relative residual |Λ − Γ-factor·L| / |Γ-factor·L| at one basepoint.
pub fn mellin_identity_residual(
    engine: &Engine,
    forms: &[FormRef],
    a: &Rational,
    s: &[i64],
    tolerance: f64,
    perturb: f64,
    opts: &Options,
) -> Result<IdentityReport> {
    let bits = engine.bits();
    let info = |n_max: Option<u64>, level: u32| RunInfo {
        digits: engine.budget().digits,
        quad_level: level,
        seed: None,
        n_max,
    };
    let ids = form_ids(forms);
    let level = forms.iter().map(|f| f.level()).max().unwrap_or(1);
    let label = vec![format!("s={}", s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))];
    if forms.iter().any(|f| f.is_zero()) {
        let z = vec![HPComplex::zero(bits)];
        let rep = IdentityReport::from_sides(
            "mellin",
            forms.len(),
            level,
            ids,
            vec![],
            vec![],
            label,
            z.clone(),
            z,
            tolerance,
            info(None, engine.level()),
        );
        return Ok(rep);
    }
    let lam = lambda_completed(engine, forms, &Cusp::Finite(a.clone()), s, opts)?;
    let g = gamma_factor(s, bits)?;
    // the truncation may cost at most a tenth of the tolerance
    let target = tolerance * lam.value.abs_f64() / g.abs_f64() / 10.0;
    let n = partial_terms_for(forms, s, target)?;
    let l = multiple_l_partial(forms, a, s, n, bits)?;
    let rhs = &g * &l.value;
    let mut lhs = lam.value.clone();
    if perturb != 0.0 {
        lhs = &lhs * &HPComplex::from_f64(1.0 + perturb, 0.0, bits);
    }
    let residual = (&lhs - &rhs).abs_f64() / rhs.abs_f64();
    let rep = IdentityReport::with_residual(
        "mellin",
        forms.len(),
        level,
        ids,
        vec![],
        vec![],
        label,
        vec![lhs],
        vec![rhs],
        residual,
        tolerance,
        info(Some(n as u64), lam.quad_level),
    );
    Ok(rep)
}
