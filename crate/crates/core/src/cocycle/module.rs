//! Module elements and the right action of Γ₀(N) on them.
//!
//! An element is a polynomial in τ (exact or high precision) or a function on
//! H⁻ evaluated lazily on lists of points. Its grade records the exponent
//! of j(γ, τ) in the action and the forms whose multipliers enter it.

use std::fmt;
use std::sync::Arc;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::forms::FormRef;
use crate::group::GroupElement;
use crate::hp::{cpow_half, HPComplex, PrecisionBudget};

pub type SampleFn = Arc<dyn Fn(&[HPComplex]) -> Result<Vec<HPComplex>> + Send + Sync>;

#[derive(Clone, Default)]
pub struct Grade {
    /// exponent of j(γ, τ), doubled
    pub twice_exp: i64,
    /// forms whose multiplier systems act, inverted, on the element
    pub chars: Vec<FormRef>,
}

impl Grade {
    pub fn of(forms: &[FormRef]) -> Grade {
        Grade {
            twice_exp: forms.iter().map(|f| f.weight().minus_two().0).sum(),
            chars: forms.iter().filter(|f| !f.trivial_multiplier()).cloned().collect(),
        }
    }

    pub fn integral(m: i64) -> Grade {
        Grade { twice_exp: 2 * m, chars: Vec::new() }
    }

    fn join(&self, o: &Grade) -> Grade {
        let mut chars = self.chars.clone();
        chars.extend(o.chars.iter().cloned());
        Grade { twice_exp: self.twice_exp + o.twice_exp, chars }
    }
}

#[derive(Clone)]
pub enum Value {
    /// coefficients of 1, τ, τ², … in Q
    Exact(Vec<Rational>),
    /// coefficients of 1, τ, τ², …
    Poly(Vec<HPComplex>),
    Func(SampleFn),
}

#[derive(Clone)]
pub struct Elem {
    pub value: Value,
    pub grade: Grade,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Exact(p) => write!(f, "Exact({p:?}; {})", self.grade.twice_exp),
            Value::Poly(p) => write!(f, "Poly({p:?}; {})", self.grade.twice_exp),
            Value::Func(_) => write!(f, "Func(; {})", self.grade.twice_exp),
        }
    }
}

impl Elem {
    pub fn zero() -> Elem {
        Elem { value: Value::Exact(Vec::new()), grade: Grade::default() }
    }

    /// The constant 1 of grade 0.
    pub fn one() -> Elem {
        Elem { value: Value::Exact(vec![Rational::from(1)]), grade: Grade::default() }
    }

    pub fn exact(coeffs: Vec<Rational>, grade: Grade) -> Elem {
        Elem { value: Value::Exact(trim_exact(coeffs)), grade }
    }

    pub fn poly(coeffs: Vec<HPComplex>, grade: Grade) -> Elem {
        Elem { value: Value::Poly(coeffs), grade }
    }

    pub fn func(f: SampleFn, grade: Grade) -> Elem {
        Elem { value: Value::Func(f), grade }
    }

    /// True for the structural zero (an exact polynomial with no terms).
    pub fn is_structural_zero(&self) -> bool {
        matches!(&self.value, Value::Exact(p) if p.is_empty())
    }

    pub fn exact_coeffs(&self) -> Option<&[Rational]> {
        match &self.value {
            Value::Exact(p) => Some(p),
            _ => None,
        }
    }
}

fn trim_exact(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    p
}

/// Precision and sample points shared by the elements of one computation.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub budget: PrecisionBudget,
    pub taus: Vec<HPComplex>,
}

/// Seven points on |τ| = 1.3 with Im τ from −0.4 to −1.2, alternating in sign of Re τ.
pub fn default_taus(bits: u32) -> Vec<HPComplex> {
    (0..7)
        .map(|j| {
            let im = -0.4 - 0.8 * j as f64 / 6.0;
            let re = (1.69 - im * im).sqrt();
            let re = if j % 2 == 0 { re } else { -re };
            HPComplex::from_f64(re, im, bits)
        })
        .collect()
}

impl Ctx {
    pub fn new(budget: PrecisionBudget) -> Ctx {
        let taus = default_taus(budget.bits());
        Ctx { budget, taus }
    }

    pub fn with_taus(mut self, taus: Vec<HPComplex>) -> Ctx {
        self.taus = taus;
        self
    }

    pub fn bits(&self) -> u32 {
        self.budget.bits()
    }

    fn pick_grade(&self, a: &Elem, b: &Elem) -> Result<Grade> {
        if a.is_structural_zero() {
            return Ok(b.grade.clone());
        }
        if b.is_structural_zero() {
            return Ok(a.grade.clone());
        }
        if a.grade.twice_exp != b.grade.twice_exp {
            return Err(Error::Argument(format!(
                "cannot add elements of grades {}/2 and {}/2",
                a.grade.twice_exp, b.grade.twice_exp
            )));
        }
        Ok(a.grade.clone())
    }

    fn to_poly(&self, v: &Value) -> Option<Vec<HPComplex>> {
        let bits = self.bits();
        match v {
            Value::Exact(p) => Some(p.iter().map(|c| HPComplex::from_rational(c, bits)).collect()),
            Value::Poly(p) => Some(p.clone()),
            Value::Func(_) => None,
        }
    }

    fn to_func(&self, v: &Value) -> SampleFn {
        match v {
            Value::Func(f) => f.clone(),
            _ => {
                let p = self.to_poly(v).unwrap();
                let bits = self.bits();
                Arc::new(move |taus: &[HPComplex]| Ok(taus.iter().map(|t| horner(&p, t, bits)).collect()))
            }
        }
    }

    fn combine(&self, a: &Elem, b: &Elem, sign: i64) -> Result<Elem> {
        let grade = self.pick_grade(a, b)?;
        let value = match (&a.value, &b.value) {
            (Value::Exact(p), Value::Exact(q)) => {
                let n = p.len().max(q.len());
                let mut out = vec![Rational::new(); n];
                for (k, c) in p.iter().enumerate() {
                    out[k] += c;
                }
                for (k, c) in q.iter().enumerate() {
                    if sign > 0 {
                        out[k] += c;
                    } else {
                        out[k] -= c;
                    }
                }
                Value::Exact(trim_exact(out))
            }
            (Value::Func(_), _) | (_, Value::Func(_)) => {
                let (f, g) = (self.to_func(&a.value), self.to_func(&b.value));
                Value::Func(Arc::new(move |taus: &[HPComplex]| {
                    let x = f(taus)?;
                    let y = g(taus)?;
                    Ok(x.iter().zip(&y).map(|(u, v)| if sign > 0 { u + v } else { u - v }).collect())
                }))
            }
            _ => {
                let (p, q) = (self.to_poly(&a.value).unwrap(), self.to_poly(&b.value).unwrap());
                let n = p.len().max(q.len());
                let bits = self.bits();
                let mut out = vec![HPComplex::zero(bits); n];
                for (k, c) in p.iter().enumerate() {
                    out[k] += c;
                }
                for (k, c) in q.iter().enumerate() {
                    if sign > 0 {
                        out[k] += c;
                    } else {
                        out[k] -= c;
                    }
                }
                Value::Poly(out)
            }
        };
        Ok(Elem { value, grade })
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.combine(a, b, 1)
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.combine(a, b, -1)
    }

    pub fn scale(&self, a: &Elem, k: i64) -> Elem {
        let value = match &a.value {
            Value::Exact(p) => Value::Exact(trim_exact(p.iter().map(|c| Rational::from(c * k)).collect())),
            Value::Poly(p) => Value::Poly(p.iter().map(|c| c.mul_int(k)).collect()),
            Value::Func(f) => {
                let f = f.clone();
                Value::Func(Arc::new(move |taus: &[HPComplex]| {
                    Ok(f(taus)?.iter().map(|v| v.mul_int(k)).collect::<Vec<_>>())
                }))
            }
        };
        Elem { value, grade: a.grade.clone() }
    }

    /// Multiplies by a complex constant; exact elements become high-precision ones.
    pub fn scale_complex(&self, a: &Elem, z: &HPComplex) -> Elem {
        let value = match &a.value {
            Value::Func(f) => {
                let (f, z) = (f.clone(), z.clone());
                Value::Func(Arc::new(move |taus: &[HPComplex]| Ok(f(taus)?.iter().map(|v| v * &z).collect::<Vec<_>>())))
            }
            v => Value::Poly(self.to_poly(v).unwrap().iter().map(|c| c * z).collect()),
        };
        Elem { value, grade: a.grade.clone() }
    }

    /// Pointwise product; grades add.
    pub fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        let grade = a.grade.join(&b.grade);
        let value = match (&a.value, &b.value) {
            (Value::Exact(p), Value::Exact(q)) => {
                if p.is_empty() || q.is_empty() {
                    Value::Exact(Vec::new())
                } else {
                    let mut out = vec![Rational::new(); p.len() + q.len() - 1];
                    for (i, x) in p.iter().enumerate() {
                        for (j, y) in q.iter().enumerate() {
                            out[i + j] += Rational::from(x * y);
                        }
                    }
                    Value::Exact(trim_exact(out))
                }
            }
            (Value::Func(_), _) | (_, Value::Func(_)) => {
                let (f, g) = (self.to_func(&a.value), self.to_func(&b.value));
                Value::Func(Arc::new(move |taus: &[HPComplex]| {
                    let x = f(taus)?;
                    let y = g(taus)?;
                    Ok(x.iter().zip(&y).map(|(u, v)| u * v).collect())
                }))
            }
            _ => {
                let (p, q) = (self.to_poly(&a.value).unwrap(), self.to_poly(&b.value).unwrap());
                let bits = self.bits();
                if p.is_empty() || q.is_empty() {
                    Value::Poly(Vec::new())
                } else {
                    let mut out = vec![HPComplex::zero(bits); p.len() + q.len() - 1];
                    for (i, x) in p.iter().enumerate() {
                        for (j, y) in q.iter().enumerate() {
                            out[i + j].add_mul(x, y);
                        }
                    }
                    Value::Poly(out)
                }
            }
        };
        Ok(Elem { value, grade })
    }

    /// ∏ χ_f(γ) over the grade's forms.
    fn character(&self, grade: &Grade, g: &GroupElement) -> Result<Option<HPComplex>> {
        if grade.chars.is_empty() || g.is_identity() {
            return Ok(None);
        }
        let mut chi = HPComplex::one(self.bits());
        for f in &grade.chars {
            chi = &chi * &f.multiplier(g, &self.budget)?;
        }
        Ok(Some(chi))
    }

    /// a∘γ: τ ↦ χ(γ)⁻¹ j(γ, τ)^e a(γτ), e the grade's exponent.
    pub fn act(&self, a: &Elem, g: &GroupElement) -> Result<Elem> {
        if g.is_identity() || a.is_structural_zero() {
            return Ok(a.clone());
        }
        let grade = a.grade.clone();
        let chi = self.character(&grade, g)?;
        let value = match &a.value {
            Value::Func(f) => {
                let (f, g, bits) = (f.clone(), *g, self.bits());
                let twice = grade.twice_exp;
                let chi_inv = match chi {
                    Some(c) => Some(c.recip()?),
                    None => None,
                };
                Value::Func(Arc::new(move |taus: &[HPComplex]| {
                    let moved = taus.iter().map(|t| g.act(t)).collect::<Result<Vec<_>>>()?;
                    let vals = f(&moved)?;
                    let mut out = Vec::with_capacity(taus.len());
                    for (t, v) in taus.iter().zip(&vals) {
                        let mut x = &cpow_half(&g.jfactor(t)?, twice)? * v;
                        if let Some(c) = &chi_inv {
                            x = &x * c;
                        }
                        out.push(x.with_prec(bits));
                    }
                    Ok(out)
                }))
            }
            v => {
                if grade.twice_exp % 2 != 0 || grade.twice_exp < 0 {
                    return Err(Error::Argument(format!(
                        "polynomial elements need a non-negative integral exponent, got {}/2",
                        grade.twice_exp
                    )));
                }
                let m = (grade.twice_exp / 2) as usize;
                let basis = action_basis(g, m);
                match v {
                    Value::Exact(p) => {
                        if chi.is_some() {
                            return Err(Error::Argument("exact elements carry no multiplier".into()));
                        }
                        check_degree(p.len(), m)?;
                        let mut out = vec![Rational::new(); m + 1];
                        for (n, c) in p.iter().enumerate() {
                            for (k, b) in basis[n].iter().enumerate() {
                                out[k] += Rational::from(c * b);
                            }
                        }
                        Value::Exact(trim_exact(out))
                    }
                    Value::Poly(p) => {
                        check_degree(p.len(), m)?;
                        let mut out = vec![HPComplex::zero(self.bits()); m + 1];
                        for (n, c) in p.iter().enumerate() {
                            for (k, b) in basis[n].iter().enumerate() {
                                if *b != 0 {
                                    out[k] += &c.mul_integer(b);
                                }
                            }
                        }
                        if let Some(chi) = chi {
                            for c in &mut out {
                                *c = c.div(&chi)?;
                            }
                        }
                        Value::Poly(out)
                    }
                    Value::Func(_) => unreachable!(),
                }
            }
        };
        Ok(Elem { value, grade })
    }

    /// Values to compare: coefficients of polynomials, or samples at the context's τ-list.
    pub fn flatten(&self, a: &Elem, as_samples: bool) -> Result<Vec<HPComplex>> {
        if as_samples {
            return (self.to_func(&a.value))(&self.taus);
        }
        match self.to_poly(&a.value) {
            Some(p) => Ok(p),
            None => (self.to_func(&a.value))(&self.taus),
        }
    }

    /// Residual comparison of two elements, padded to a common length.
    pub fn compare(&self, lhs: &Elem, rhs: &Elem) -> Result<(Vec<HPComplex>, Vec<HPComplex>, bool)> {
        let samples = matches!(lhs.value, Value::Func(_)) || matches!(rhs.value, Value::Func(_));
        let mut l = self.flatten(lhs, samples)?;
        let mut r = self.flatten(rhs, samples)?;
        let n = l.len().max(r.len());
        l.resize(n, HPComplex::zero(self.bits()));
        r.resize(n, HPComplex::zero(self.bits()));
        Ok((l, r, samples))
    }
}

fn check_degree(len: usize, m: usize) -> Result<()> {
    if len > m + 1 {
        return Err(Error::Argument(format!("polynomial of degree {} exceeds the weight bound {m}", len - 1)));
    }
    Ok(())
}

pub(crate) fn horner(p: &[HPComplex], t: &HPComplex, bits: u32) -> HPComplex {
    let mut acc = HPComplex::zero(bits);
    for c in p.iter().rev() {
        acc = &(&acc * t) + c;
    }
    acc
}

/// Integer coefficients of (aτ+b)^n (cτ+d)^{m−n} for n = 0..=m.
fn action_basis(g: &GroupElement, m: usize) -> Vec<Vec<Integer>> {
    let powers = |x: i64, y: i64| {
        // (xτ + y)^e for e = 0..=m
        let mut out = vec![vec![Integer::from(1)]];
        for e in 1..=m {
            let prev: &Vec<Integer> = &out[e - 1];
            let mut next = vec![Integer::new(); e + 1];
            for (k, c) in prev.iter().enumerate() {
                next[k] += Integer::from(c * y);
                next[k + 1] += Integer::from(c * x);
            }
            out.push(next);
        }
        out
    };
    let num = powers(g.a, g.b);
    let den = powers(g.c, g.d);
    (0..=m)
        .map(|n| {
            let (p, q) = (&num[n], &den[m - n]);
            let mut out = vec![Integer::new(); m + 1];
            for (i, x) in p.iter().enumerate() {
                for (j, y) in q.iter().enumerate() {
                    out[i + j] += Integer::from(x * y);
                }
            }
            out
        })
        .collect()
}
