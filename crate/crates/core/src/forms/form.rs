use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use rug::{Float, Integer, Rational};

use super::delta::delta_qexp;
use super::multiplier::{default_samples, infer_multiplier, MultiplierTable};
use super::parse::load_qexp;
use super::qexp::{CoefficientBound, MultiplierMode, QExpansion};
use super::theta::theta_unary;
use crate::error::{Error, Result};
use crate::group::{GroupElement, Weight};
use crate::hp::{cpow_half, digits_of_bits, HPComplex, PrecisionBudget};

const LN10: f64 = std::f64::consts::LN_10;

#[derive(Clone, Debug, PartialEq)]
enum Source {
    Delta,
    Theta { j: i64, n: i64 },
    File(PathBuf),
    Zero,
}

/// A cusp form with lazily extended coefficients and cached multipliers.
pub struct Form {
    id: String,
    source: Source,
    scale: Option<HPComplex>,
    bits: u32,
    qexp: RwLock<Arc<QExpansion>>,
    multipliers: MultiplierTable,
}

impl std::fmt::Debug for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Form({})", self.id)
    }
}

/// Element g ∈ Γ₀(N) with g·a = ∞ together with the form's multiplier χ(g).
#[derive(Clone, Debug)]
pub struct Chart {
    pub g: GroupElement,
    pub chi: HPComplex,
}

/// g = [[A,B],[q,−p]] sending a = p/q to ∞.
pub fn chart_element(a: &Rational) -> GroupElement {
    let p = a.numer().clone();
    let q = a.denom().clone();
    let (_, s, t) = p.clone().gcd_cofactors(q.clone(), Integer::new());
    let ai = Integer::from(-s).to_i64().expect("cusp numerator too large");
    let bi = Integer::from(-t).to_i64().expect("cusp denominator too large");
    let g = GroupElement { a: ai, b: bi, c: q.to_i64().unwrap(), d: -p.to_i64().unwrap() };
    debug_assert_eq!(g.a as i128 * g.d as i128 - g.b as i128 * g.c as i128, 1);
    g
}

impl Form {
    fn build(id: String, source: Source, q: QExpansion, bits: u32) -> Form {
        Form { id, source, scale: None, bits, qexp: RwLock::new(Arc::new(q)), multipliers: MultiplierTable::default() }
    }

    pub fn delta(bits: u32) -> Result<Form> {
        Ok(Self::build("delta".into(), Source::Delta, delta_qexp(64, bits)?, bits))
    }

    pub fn theta(j: i64, n: i64, bits: u32) -> Result<Form> {
        Ok(Self::build(format!("theta:{j}:{n}"), Source::Theta { j, n }, theta_unary(j, n, 64, bits)?, bits))
    }

    pub fn from_file(path: &std::path::Path, bits: u32) -> Result<Form> {
        let q = load_qexp(path, bits)?;
        Ok(Self::build(format!("file:{}", path.display()), Source::File(path.to_path_buf()), q, bits))
    }

    pub fn from_qexp(id: &str, q: QExpansion, bits: u32) -> Form {
        Self::build(id.to_string(), Source::File(PathBuf::from(id)), q, bits)
    }

    /// The zero form, treated as weight 12 and level 1.
    pub fn zero(bits: u32) -> Form {
        let q = QExpansion::new(
            Weight::integral(12),
            1,
            1,
            Vec::new(),
            u64::MAX,
            MultiplierMode::Trivial,
            CoefficientBound { c: 1.0, alpha: 0.0 },
        )
        .expect("empty expansion is valid");
        Self::build("zero".into(), Source::Zero, q, bits)
    }

    /// Parses `delta`, `theta:<j>:<N>`, `file:<path>` or `zero`.
    pub fn from_spec(spec: &str, bits: u32) -> Result<Form> {
        let s = spec.trim();
        if s == "delta" {
            return Self::delta(bits);
        }
        if s == "zero" {
            return Ok(Self::zero(bits));
        }
        if let Some(rest) = s.strip_prefix("theta:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() == 2 {
                let j = parts[0].parse().map_err(|_| Error::Argument(format!("bad theta index in '{s}'")))?;
                let n = parts[1].parse().map_err(|_| Error::Argument(format!("bad theta level in '{s}'")))?;
                return Self::theta(j, n, bits);
            }
            return Err(Error::Argument(format!("theta spec must be theta:<j>:<N>, got '{s}'")));
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Self::from_file(std::path::Path::new(p), bits);
        }
        Err(Error::Argument(format!("unknown form spec '{s}' (expected delta, theta:<j>:<N>, file:<path>, zero)")))
    }

    /// The same form with every coefficient multiplied by λ.
    pub fn scaled(&self, lambda: &HPComplex, id: &str) -> Form {
        let q = self.qexp().scaled(lambda);
        let scale = match &self.scale {
            Some(s) => s * lambda,
            None => lambda.clone(),
        };
        Form {
            id: id.to_string(),
            source: self.source.clone(),
            scale: Some(scale),
            bits: self.bits,
            qexp: RwLock::new(Arc::new(q)),
            multipliers: MultiplierTable::default(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn qexp(&self) -> Arc<QExpansion> {
        self.qexp.read().unwrap().clone()
    }

    pub fn weight(&self) -> Weight {
        self.qexp().weight
    }

    pub fn level(&self) -> i64 {
        self.qexp().level
    }

    pub fn is_zero(&self) -> bool {
        self.qexp().is_zero()
    }

    pub fn nu_min(&self) -> f64 {
        self.qexp().nu_min().unwrap_or(1.0)
    }

    pub fn trivial_multiplier(&self) -> bool {
        self.qexp().multiplier_mode == MultiplierMode::Trivial
    }

    fn regenerate(&self, required: f64) -> Result<()> {
        let cur = self.qexp();
        let have = cur.complete_to as f64 / cur.den as f64;
        let want = (required * 1.25).max(have * 2.0).ceil() as u64 + 1;
        let fresh = match &self.source {
            Source::Delta => delta_qexp(want as usize, self.bits)?,
            Source::Theta { j, n } => theta_unary(*j, *n, want, self.bits)?,
            _ => return Err(Error::InsufficientCoefficients { required }),
        };
        let fresh = match &self.scale {
            Some(l) => fresh.scaled(l),
            None => fresh,
        };
        let mut w = self.qexp.write().unwrap();
        if w.complete_to < fresh.complete_to {
            *w = Arc::new(fresh);
        }
        Ok(())
    }

    /// Makes every exponent up to `upto` available, extending generated forms.
    pub fn ensure_coefficients(&self, upto: f64) -> Result<()> {
        let q = self.qexp();
        if (q.complete_to as f64) / (q.den as f64) >= upto {
            return Ok(());
        }
        self.regenerate(upto)
    }

    /// q-series at τ with tail below e^{ln_target}, extending coefficients on demand.
    pub fn eval_series(&self, tau: &HPComplex, ln_target: f64) -> Result<HPComplex> {
        loop {
            let q = self.qexp();
            match q.eval_ln_target(tau, ln_target) {
                Err(Error::InsufficientCoefficients { required }) => self.regenerate(required)?,
                r => return r.map(|o| o.value),
            }
        }
    }

    /// Direct series with extra bits against cancellation and a relative tail target.
    fn eval_direct(&self, w: &HPComplex, bits: u32) -> Result<HPComplex> {
        let q = self.qexp();
        let y = w.im.to_f64();
        let lead = q.ln_leading(y);
        let spread = (q.ln_abs_bound(y) - lead).max(0.0);
        let extra = (spread / std::f64::consts::LN_2).ceil() as u32 + 8;
        let wb = w.clone().with_prec(bits + extra);
        let ln_target = lead - (digits_of_bits(bits) as f64 + 5.0) * LN10;
        Ok(self.eval_series(&wb, ln_target)?.with_prec(bits))
    }

    /// f(w) at working precision `bits`, reducing into the fundamental domain for level-1 forms.
    pub fn eval_point(&self, w: &HPComplex, bits: u32) -> Result<HPComplex> {
        if self.is_zero() {
            return Ok(HPComplex::zero(bits));
        }
        if w.im.is_sign_negative() || w.im.is_zero() {
            return Err(Error::Domain(format!("{} evaluated at Im w ≤ 0", self.id)));
        }
        if self.can_reduce() && w.im.to_f64() < 0.5 {
            return self.eval_reduced(w, None, bits);
        }
        self.eval_direct(w, bits)
    }

    fn can_reduce(&self) -> bool {
        let q = self.qexp();
        q.level == 1 && q.multiplier_mode == MultiplierMode::Trivial && q.weight.is_integral()
    }

    /// SL₂(Z) reduction: f(w) = j(M,w)^{−k} f(Mw) with Mw in the fundamental domain.
    /// `exact_re` gives the real part exactly when known.
    fn eval_reduced(&self, w: &HPComplex, exact_re: Option<&Rational>, bits: u32) -> Result<HPComplex> {
        let y = w.im.to_f64();
        let boost = bits + 2 * ((-y.log2()).max(0.0).ceil() as u32) + 32;
        let w0 = match exact_re {
            Some(a) => HPComplex::new(Float::with_val(boost, a), w.im.clone().with_prec_round(boost)),
            None => w.clone().with_prec(boost),
        };
        let mut z = w0.clone();
        let mut m = GroupElement::identity();
        for _ in 0..100_000 {
            let n = z.re.to_integer().and_then(|v| v.to_i64()).ok_or_else(|| Error::Domain("reduction overflow".into()))?;
            if n != 0 {
                z.re -= n;
                m = GroupElement { a: 1, b: -n, c: 0, d: 1 }.mul(&m);
            }
            if z.norm_sqr() < 1.0 - 1e-40 {
                z = -(z.recip()?);
                m = GroupElement::s().mul(&m);
            } else {
                break;
            }
        }
        let j = m.jfactor(&w0)?;
        let jk = j.powi(-self.weight().0 / 2)?;
        let v = self.eval_direct(&z.with_prec(bits + 16), bits + 16)?;
        Ok((&jk * &v).with_prec(bits))
    }

    /// χ(g): 1 for trivial multiplier systems, otherwise inferred and cached.
    pub fn multiplier(&self, g: &GroupElement, budget: &PrecisionBudget) -> Result<HPComplex> {
        if self.trivial_multiplier() || g.is_identity() {
            return Ok(HPComplex::one(budget.bits()));
        }
        if let Some(v) = self.multipliers.get(g) {
            return Ok(v);
        }
        let v = self.infer(g, budget)?;
        self.multipliers.insert(*g, v.clone());
        Ok(v)
    }

    /// Numerical inference regardless of the declared multiplier mode.
    pub fn infer(&self, g: &GroupElement, budget: &PrecisionBudget) -> Result<HPComplex> {
        let samples = default_samples(g, budget.bits());
        loop {
            let q = self.qexp();
            match infer_multiplier(&q, g, &samples, budget) {
                Err(Error::InsufficientCoefficients { required }) => self.regenerate(required)?,
                r => return r,
            }
        }
    }

    pub fn multiplier_table(&self) -> &MultiplierTable {
        &self.multipliers
    }

    /// Chart at the cusp a for this form's level, or an unsupported-cusp error.
    pub fn chart(&self, a: &Rational, budget: &PrecisionBudget) -> Result<Chart> {
        let g = chart_element(a);
        if g.c % self.level() != 0 && !self.can_reduce() {
            return Err(Error::UnsupportedCusp(format!(
                "{a} is not Γ₀({})-equivalent to ∞ via an element with N | c",
                self.level()
            )));
        }
        let chi = if g.c % self.level() == 0 { self.multiplier(&g, budget)? } else { HPComplex::one(budget.bits()) };
        Ok(Chart { g, chi })
    }

    /// Upper bound for ln|f(a + iu)| from the chart at a.
    pub fn ln_bound_on_line(&self, chart: &Chart, u: f64) -> f64 {
        let q = self.qexp();
        let c = chart.g.c.abs() as f64;
        let direct = q.ln_abs_bound(u);
        let y = 1.0 / (c * c * u);
        let moved = q.ln_abs_bound(y) - q.weight.as_f64() * (c * u).ln();
        direct.min(moved)
    }

    /// f(a + iu) on the vertical line above the cusp a; exact zero when below e^{ln_negl}.
    pub fn eval_on_line(&self, a: &Rational, chart: &Chart, u: &Float, bits: u32, ln_negl: f64) -> Result<HPComplex> {
        if self.is_zero() {
            return Ok(HPComplex::zero(bits));
        }
        let uf = u.to_f64();
        if self.ln_bound_on_line(chart, uf) < ln_negl {
            return Ok(HPComplex::zero(bits));
        }
        let c = chart.g.c;
        if self.can_reduce() {
            let w = HPComplex::new(Float::with_val(bits, a), u.clone().with_prec_round(bits));
            if uf >= 0.5 {
                return self.eval_direct(&w, bits);
            }
            return self.eval_reduced(&w, Some(a), bits);
        }
        if uf * (c.abs() as f64) >= 1.0 {
            let w = HPComplex::new(Float::with_val(bits + 64, a), u.clone().with_prec_round(bits + 64));
            return self.eval_direct(&w, bits);
        }
        // g(a+iu) = g.a/c + i/(c²u), j(g, a+iu) = icu
        let gw = HPComplex::new(
            Float::with_val(bits, Rational::from((chart.g.a, c))),
            (Float::with_val(bits, u * c) * c).recip(),
        );
        let j = HPComplex::new(Float::new(bits), Float::with_val(bits, u * c));
        let jk = cpow_half(&j, -self.weight().0)?;
        let v = self.eval_direct(&gw, bits)?;
        (&jk * &v).div(&chart.chi)
    }

    /// ln of a bound for |f(w)| at a general point; used to skip negligible nodes.
    pub fn ln_bound_at(&self, y: f64) -> f64 {
        self.qexp().ln_abs_bound(y)
    }
}

trait WithPrecRound {
    fn with_prec_round(self, bits: u32) -> Float;
}

impl WithPrecRound for Float {
    fn with_prec_round(mut self, bits: u32) -> Float {
        self.set_prec(bits);
        self
    }
}

pub type FormRef = Arc<Form>;
