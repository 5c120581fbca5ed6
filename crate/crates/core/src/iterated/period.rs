use rug::Float;

use super::grid::{Engine, Line, Nested, SampleKernel};
use super::lambda::lambda_table;
use super::{check_depth, form_ids, refine, Options};
use crate::error::{Error, Result};
use crate::forms::FormRef;
use crate::group::{Cusp, GroupElement, Weight};
use crate::hp::{a_coefficient, binomial, HPComplex};
use crate::report::{scaled_residual, IdentityReport, RunInfo};

/// Minimum distance between τ and the integration path when the kernel has a branch point.
pub const PATH_DELTA: f64 = 1e-3;

/// Σ_n L_n (a − τ)^n about the cusp a.
#[derive(Clone, Debug)]
pub struct PeriodPolynomial {
    pub forms: Vec<String>,
    pub center: Cusp,
    /// coefficient of (a − τ)^n
    pub coeffs: Vec<HPComplex>,
    pub err: f64,
    pub quad_level: u32,
}

impl PeriodPolynomial {
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients in powers of τ.
    pub fn tau_coeffs(&self) -> Vec<HPComplex> {
        let bits = self.coeffs.first().map(|c| c.prec()).unwrap_or(64);
        let d = self.coeffs.len();
        let mut out = vec![HPComplex::zero(bits); d];
        let a = match &self.center {
            Cusp::Infinity => return out,
            Cusp::Finite(a) => a.clone(),
        };
        let p = a.numer().clone();
        let q = a.denom().clone();
        // (a − τ)^n = Σ_k C(n,k) a^{n−k} (−τ)^k, with a^{n−k} = p^{n−k}/q^{n−k}
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for k in 0..=n {
                let mut num = binomial(n as i64, k as i64) * rug::ops::Pow::pow(p.clone(), (n - k) as u32);
                if k % 2 == 1 {
                    num = -num;
                }
                let den = rug::ops::Pow::pow(q.clone(), (n - k) as u32);
                let f = Float::with_val(bits, rug::Rational::from((num, den)));
                out[k] += &c.mul_real(&f);
            }
        }
        out
    }

    pub fn eval(&self, tau: &HPComplex) -> HPComplex {
        let bits = tau.prec();
        let a = match &self.center {
            Cusp::Infinity => return HPComplex::zero(bits),
            Cusp::Finite(a) => HPComplex::from_rational(a, bits),
        };
        let x = &a - tau;
        let mut acc = HPComplex::zero(bits);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &x) + c;
        }
        acc
    }
}

fn even_exponents(forms: &[FormRef]) -> Result<Vec<i64>> {
    forms
        .iter()
        .map(|f| {
            let w = f.weight();
            if !w.is_integral() || w.0 % 4 != 0 || w.0 < 4 {
                return Err(Error::Argument(format!(
                    "{} has weight {w}; the polynomial expansion needs even integral weights",
                    f.id()
                )));
            }
            Ok(w.0 / 2 - 2)
        })
        .collect()
}

/// r*_{f_1..f_r}(k_1−2, …, k_r−2)(γ) as a polynomial, from Λ-values at γ⁻¹i∞.
pub fn period_polynomial(engine: &Engine, forms: &[FormRef], g: &GroupElement, opts: &Options) -> Result<PeriodPolynomial> {
    period_polynomial_at(engine, forms, &g.cusp_image(), opts)
}

pub fn period_polynomial_at(engine: &Engine, forms: &[FormRef], center: &Cusp, opts: &Options) -> Result<PeriodPolynomial> {
    check_depth(forms, opts)?;
    let m = even_exponents(forms)?;
    let r = forms.len();
    let total: i64 = m.iter().sum();
    let bits = engine.bits();
    let zero = PeriodPolynomial {
        forms: form_ids(forms),
        center: center.clone(),
        coeffs: vec![HPComplex::zero(bits); total as usize + 1],
        err: 0.0,
        quad_level: engine.level(),
    };
    if matches!(center, Cusp::Infinity) || forms.iter().any(|f| f.is_zero()) {
        return Ok(zero);
    }
    // n_j ≤ m_j + … + m_r
    let widths: Vec<usize> = (0..r).map(|j| m[j..].iter().sum::<i64>() as usize + 1).collect();
    let table = lambda_table(engine, forms, center, &widths, opts)?;
    let mut coeffs = zero.coeffs;
    let mut errs = vec![0.0f64; total as usize + 1];
    let mut tail = vec![0usize; r];
    // enumerate (n_2, …, n_r); n_1 is fixed by n
    loop {
        let rest: i64 = tail[1..].iter().map(|x| *x as i64).sum();
        for n in 0..=total {
            let n1 = total - rest - n;
            if n1 < 0 {
                break;
            }
            let mut idx = tail.clone();
            idx[0] = n1 as usize;
            let a = a_coefficient(&idx.iter().map(|x| *x as i64).collect::<Vec<_>>(), &m)?;
            if a == 0 {
                continue;
            }
            let v = table.get(&idx);
            coeffs[n as usize] += &v.mul_integer(&a);
            errs[n as usize] += table.err_at(&idx) * a.to_f64();
        }
        // next tuple
        let mut j = r;
        loop {
            if j == 1 {
                return Ok(PeriodPolynomial {
                    forms: form_ids(forms),
                    center: center.clone(),
                    coeffs,
                    err: errs.into_iter().fold(0.0, f64::max),
                    quad_level: table.quad_level,
                });
            }
            j -= 1;
            tail[j] += 1;
            if tail[j] < widths[j] {
                break;
            }
            tail[j] = 0;
        }
    }
}

fn needs_clearance(exps: &[Weight]) -> bool {
    exps.iter().any(|e| !e.is_integral() || e.0 < 0)
}

/// r*(s_1, …, s_r)(γ) at each τ; the exponents are given as half-integers.
pub fn rstar(engine: &Engine, forms: &[FormRef], exps: &[Weight], g: &GroupElement, taus: &[HPComplex], opts: &Options) -> Result<Nested> {
    rstar_at(engine, forms, exps, &g.cusp_image(), taus, opts)
}

/// ∫ from the cusp a to i∞ of ∏ f_j(w_j)(w_j − τ)^{s_j} with vertical inner paths.
pub fn rstar_at(
    engine: &Engine,
    forms: &[FormRef],
    exps: &[Weight],
    center: &Cusp,
    taus: &[HPComplex],
    opts: &Options,
) -> Result<Nested> {
    check_depth(forms, opts)?;
    if exps.len() != forms.len() {
        return Err(Error::Argument(format!("{} forms but {} exponents", forms.len(), exps.len())));
    }
    let bits = engine.bits();
    let n = taus.len();
    let zero = Nested { value: vec![HPComplex::zero(bits); n], delta: vec![0.0; n], err: vec![0.0; n] };
    let a = match center {
        Cusp::Infinity => return Ok(zero),
        Cusp::Finite(a) => a.clone(),
    };
    if n == 0 || forms.iter().any(|f| f.is_zero()) {
        return Ok(zero);
    }
    if needs_clearance(exps) {
        let af = HPComplex::from_rational(&a, bits);
        for t in taus {
            if t.im.is_sign_positive() && !t.im.is_zero() {
                return Err(Error::PathConflict(format!(
                    "τ = {} lies in the upper half-plane; half-integral kernels need τ in H⁻",
                    fmt_tau(t)
                )));
            }
            if (&af - t).abs_f64() < PATH_DELTA {
                return Err(Error::PathConflict(format!("τ = {} is within {PATH_DELTA} of the cusp {a}", fmt_tau(t))));
            }
        }
    }
    let line = Line::Cusp(a);
    let kernel = SampleKernel {
        base: line.base(bits + 32),
        taus: taus.iter().map(|t| t.clone().with_prec(bits + 32)).collect(),
        twice_exps: exps.iter().map(|e| e.0).collect(),
        bits,
    };
    let (out, _) = refine(engine, opts.max_refine, |e| {
        let v = e.nested(&line, forms, &kernel)?;
        let scale = v.value.iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
        let err = v.err.iter().cloned().fold(0.0, f64::max);
        Ok((v, err, scale))
    })?;
    Ok(out)
}

fn fmt_tau(t: &HPComplex) -> String {
    let (x, y) = t.to_f64_pair();
    format!("{x}{y:+}i")
}

/// The expansion Σ 𝓛(a; n)(a − τ)^n against r* evaluated directly at each τ.
/// `perturb` scales the polynomial side by 1 + perturb.
pub fn route_residual(
    engine: &Engine,
    forms: &[FormRef],
    g: &GroupElement,
    taus: &[HPComplex],
    tolerance: f64,
    perturb: f64,
    opts: &Options,
) -> Result<IdentityReport> {
    let bits = engine.bits();
    let p = period_polynomial(engine, forms, g, opts)?;
    let exps: Vec<Weight> = forms.iter().map(|f| f.weight().minus_two()).collect();
    let direct = rstar(engine, forms, &exps, g, taus, opts)?;
    let factor = HPComplex::from_f64(1.0 + perturb, 0.0, bits);
    let lhs: Vec<HPComplex> = taus.iter().map(|t| &p.eval(t) * &factor).collect();
    let info = RunInfo { digits: engine.budget().digits, quad_level: engine.level(), seed: None, n_max: None };
    Ok(IdentityReport::with_residual(
        "route",
        forms.len(),
        forms.iter().map(|f| f.level()).max().unwrap_or(1),
        form_ids(forms),
        vec![*g],
        taus.to_vec(),
        (0..taus.len()).map(|k| format!("tau{k}")).collect(),
        lhs.clone(),
        direct.value.clone(),
        scaled_residual(&lhs, &direct.value),
        tolerance,
        info,
    ))
}
