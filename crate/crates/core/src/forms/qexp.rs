use std::f64::consts::PI;

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::group::Weight;
use crate::hp::{pi, HPComplex, PrecisionBudget};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplierMode {
    Trivial,
    Inferred,
}

/// |c(ν)| ≤ C·ν^α for every exponent ν.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientBound {
    pub c: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug)]
pub struct Term {
    /// exponent is num/den of the owning expansion
    pub num: u64,
    pub coeff: HPComplex,
}

/// Truncated q-expansion Σ c(ν) q^ν with exponents in (1/den)·Z_{>0}.
#[derive(Clone, Debug)]
pub struct QExpansion {
    pub weight: Weight,
    pub level: i64,
    pub den: u64,
    pub terms: Vec<Term>,
    /// every exponent ≤ complete_to/den is present (zero coefficients omitted)
    pub complete_to: u64,
    pub multiplier_mode: MultiplierMode,
    pub bound: CoefficientBound,
}

pub struct EvalOut {
    pub value: HPComplex,
    /// rigorous bound on the omitted terms
    pub tail: f64,
}

impl QExpansion {
    pub fn new(
        weight: Weight,
        level: i64,
        den: u64,
        mut terms: Vec<Term>,
        complete_to: u64,
        multiplier_mode: MultiplierMode,
        bound: CoefficientBound,
    ) -> Result<Self> {
        if level < 1 || den == 0 {
            return Err(Error::Argument("level and exponent denominator must be positive".into()));
        }
        terms.retain(|t| !t.coeff.is_zero());
        for w in terms.windows(2) {
            if w[0].num >= w[1].num {
                return Err(Error::Argument("exponents must be strictly increasing".into()));
            }
        }
        if terms.first().is_some_and(|t| t.num == 0) {
            return Err(Error::Argument("exponents must be strictly positive".into()));
        }
        let q = QExpansion { weight, level, den, terms, complete_to, multiplier_mode, bound };
        if let Some(bad) = q.bound_violation() {
            return Err(Error::Argument(format!("coefficient bound violated at exponent {bad}")));
        }
        Ok(q)
    }

    pub fn exponent(&self, t: &Term) -> Rational {
        Rational::from((t.num, self.den))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent with nonzero coefficient.
    pub fn nu_min(&self) -> Option<f64> {
        self.terms.first().map(|t| t.num as f64 / self.den as f64)
    }

    pub fn coeff_at(&self, num: u64, den: u64) -> Option<&HPComplex> {
        let q = Rational::from((num, den)) * self.den;
        if *q.denom() != 1 {
            return None;
        }
        let n = q.numer().to_u64()?;
        self.terms.binary_search_by_key(&n, |t| t.num).ok().map(|k| &self.terms[k].coeff)
    }

    /// First stored exponent whose coefficient exceeds the declared bound.
    pub fn bound_violation(&self) -> Option<Rational> {
        for t in &self.terms {
            let nu = t.num as f64 / self.den as f64;
            let lim = self.bound.c * nu.powf(self.bound.alpha) * (1.0 + 1e-12);
            if t.coeff.abs_f64() > lim {
                return Some(self.exponent(t));
            }
        }
        None
    }

    /// ln of the bound on Σ_{n ≥ n0} |c(n/den)| e^{−2π y n/den}, or +∞ while terms still grow.
    fn ln_tail_from(&self, n0: u64, y: f64) -> f64 {
        let d = self.den as f64;
        let n = n0.max(1) as f64;
        let step = 2.0 * PI * y / d;
        let ln_ratio = self.bound.alpha * (1.0 + 1.0 / n).ln() - step;
        if ln_ratio >= 0.0 {
            return f64::INFINITY;
        }
        let ln_first = self.bound.c.ln() + self.bound.alpha * (n / d).ln() - step * n;
        ln_first - (-(ln_ratio.exp_m1())).ln()
    }

    /// Smallest cutoff n0 (in units of 1/den) whose tail bound is below e^{ln_target}.
    pub fn cutoff(&self, y: f64, ln_target: f64) -> u64 {
        let mut hi: u64 = 1;
        while self.ln_tail_from(hi, y) > ln_target {
            hi = hi.saturating_mul(2);
            if hi == u64::MAX {
                return hi;
            }
        }
        let mut lo = hi / 2;
        if lo == 0 {
            return hi;
        }
        // lo fails (or is 0), hi passes
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.ln_tail_from(mid, y) <= ln_target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Σ c(ν) e^{2πiντ} with tail below e^{ln_target}; working precision follows τ.
    pub fn eval_ln_target(&self, tau: &HPComplex, ln_target: f64) -> Result<EvalOut> {
        let bits = tau.prec();
        if !tau.im.is_sign_positive() || tau.im.is_zero() {
            return Err(Error::Domain("q-expansion evaluated at Im τ ≤ 0".into()));
        }
        if self.terms.is_empty() && self.complete_to == u64::MAX {
            return Ok(EvalOut { value: HPComplex::zero(bits), tail: 0.0 });
        }
        let y = tau.im.to_f64();
        let n0 = self.cutoff(y, ln_target);
        if n0.saturating_sub(1) > self.complete_to {
            return Err(Error::InsufficientCoefficients { required: n0 as f64 / self.den as f64 });
        }
        let tail = self.ln_tail_from(n0, y).exp();
        // q_D = e^{2πiτ/den}
        let two_pi = Float::with_val(bits, pi(bits) * 2u32) / self.den;
        let arg = HPComplex::new(
            Float::with_val(bits, -Float::with_val(bits, &tau.im * &two_pi)),
            Float::with_val(bits, &tau.re * &two_pi),
        );
        let qd = arg.exp();
        let mut acc = HPComplex::zero(bits);
        let mut power = HPComplex::one(bits);
        let mut last = 0u64;
        let mut gap_pow: Option<(u64, HPComplex)> = None;
        let mut small: Vec<Option<HPComplex>> = vec![None; 64];
        let pow_of = |e: u64, small: &mut Vec<Option<HPComplex>>| -> Result<HPComplex> {
            if (e as usize) < small.len() {
                if let Some(v) = &small[e as usize] {
                    return Ok(v.clone());
                }
                let v = qd.powi(e as i64)?;
                small[e as usize] = Some(v.clone());
                return Ok(v);
            }
            qd.powi(e as i64)
        };
        for t in &self.terms {
            if t.num >= n0 {
                break;
            }
            let gap = t.num - last;
            let g = match gap_pow.take() {
                Some((pg, pv)) if pg == gap => pv,
                Some((pg, pv)) if gap > pg && gap - pg < 64 => &pv * &pow_of(gap - pg, &mut small)?,
                _ => pow_of(gap, &mut small)?,
            };
            power = &power * &g;
            gap_pow = Some((gap, g));
            last = t.num;
            acc.add_mul(&t.coeff, &power);
        }
        Ok(EvalOut { value: acc, tail })
    }

    /// Evaluation with the absolute tail target of the budget.
    pub fn eval(&self, tau: &HPComplex, budget: &PrecisionBudget) -> Result<EvalOut> {
        self.eval_ln_target(tau, budget.series_tail_target.ln())
    }

    /// ln of an estimate of |f(τ)| from the leading term, for relative targets.
    pub fn ln_leading(&self, y: f64) -> f64 {
        match self.terms.first() {
            None => f64::NEG_INFINITY,
            Some(t) => {
                let nu = t.num as f64 / self.den as f64;
                t.coeff.log10_abs() * std::f64::consts::LN_10 - 2.0 * PI * nu * y
            }
        }
    }

    /// ln of the bound Σ|c(ν)|e^{−2πνy} over all ν ≥ ν_min.
    pub fn ln_abs_bound(&self, y: f64) -> f64 {
        let Some(first) = self.terms.first() else {
            return f64::NEG_INFINITY;
        };
        let d = self.den as f64;
        let alpha = self.bound.alpha;
        let step = 2.0 * PI * y / d;
        // terms grow while α·ln(1+1/n) ≥ step
        let n_turn = if alpha > 0.0 { 1.0 / (step / alpha).exp_m1() } else { 0.0 };
        if n_turn > first.num as f64 + 4096.0 {
            // count × largest term, then the geometric tail from 2·n_turn
            let n2 = (2.0 * n_turn).ceil();
            let nu_peak = alpha / (2.0 * PI * y);
            let ln_max = self.bound.c.ln() + alpha * nu_peak.ln() - alpha;
            let head = n2.ln() + ln_max;
            return logaddexp(head, self.ln_tail_from(n2 as u64, y));
        }
        let mut acc = f64::NEG_INFINITY;
        let mut n = first.num;
        loop {
            let lt = self.ln_tail_from(n, y);
            if lt.is_finite() {
                return logaddexp(acc, lt);
            }
            let ln_term = self.bound.c.ln() + self.bound.alpha * (n as f64 / d).ln() - 2.0 * PI * y * n as f64 / d;
            acc = logaddexp(acc, ln_term);
            n += 1;
        }
    }

    /// Multiplies every coefficient by λ.
    pub fn scaled(&self, lambda: &HPComplex) -> QExpansion {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = &t.coeff * lambda;
        }
        let m = lambda.abs_f64();
        out.bound.c *= m.max(f64::MIN_POSITIVE);
        out.terms.retain(|t| !t.coeff.is_zero());
        out
    }
}

pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Bound constant C = 2·max |c(ν)|/ν^α over the stored terms.
pub fn calibrate_bound(terms: &[Term], den: u64, alpha: f64) -> CoefficientBound {
    let mut c: f64 = 0.0;
    for t in terms {
        let nu = t.num as f64 / den as f64;
        c = c.max(t.coeff.abs_f64() / nu.powf(alpha));
    }
    CoefficientBound { c: if c > 0.0 { 2.0 * c } else { 1.0 }, alpha }
}

pub(crate) fn int_coeff(n: &Integer, bits: u32) -> HPComplex {
    HPComplex::from_integer(n, bits)
}
