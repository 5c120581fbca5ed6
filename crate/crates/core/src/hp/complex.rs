use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Complex number backed by a pair of MPFR floats sharing one precision.
#[derive(Clone, PartialEq)]
pub struct HPComplex {
    pub re: Float,
    pub im: Float,
}

impl HPComplex {
    pub fn new(re: Float, im: Float) -> Self {
        let p = re.prec().max(im.prec());
        let mut z = HPComplex { re, im };
        z.set_prec(p);
        z
    }

    pub fn zero(bits: u32) -> Self {
        HPComplex { re: Float::new(bits), im: Float::new(bits) }
    }

    pub fn one(bits: u32) -> Self {
        Self::from_f64(1.0, 0.0, bits)
    }

    pub fn i(bits: u32) -> Self {
        Self::from_f64(0.0, 1.0, bits)
    }

    pub fn from_f64(re: f64, im: f64, bits: u32) -> Self {
        HPComplex { re: Float::with_val(bits, re), im: Float::with_val(bits, im) }
    }

    pub fn from_real(re: Float) -> Self {
        let p = re.prec();
        HPComplex { re, im: Float::new(p) }
    }

    pub fn from_int(n: i64, bits: u32) -> Self {
        HPComplex { re: Float::with_val(bits, n), im: Float::new(bits) }
    }

    pub fn from_integer(n: &Integer, bits: u32) -> Self {
        HPComplex { re: Float::with_val(bits, n), im: Float::new(bits) }
    }

    pub fn from_rational(q: &Rational, bits: u32) -> Self {
        HPComplex { re: Float::with_val(bits, q), im: Float::new(bits) }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, bits: u32) -> Self {
        HPComplex { re: Float::with_val(bits, re), im: Float::with_val(bits, im) }
    }

    /// Parses "a", "a+bi", "a-bi", "bi" with decimal components.
    pub fn parse(s: &str, bits: u32) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Argument(format!("cannot parse complex number '{s}'"));
        if t.is_empty() {
            return Err(bad());
        }
        let real = |x: &str| -> Result<Float> {
            let v = Float::parse(x).map_err(|_| bad())?;
            Ok(Float::with_val(bits, v))
        };
        if let Some(body) = t.strip_suffix('i') {
            // split at the last sign that is not part of an exponent
            let bytes = body.as_bytes();
            let mut split = None;
            for k in (1..bytes.len()).rev() {
                if (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'e' && bytes[k - 1] != b'E' {
                    split = Some(k);
                    break;
                }
            }
            let (re_s, im_s) = match split {
                Some(k) => (&body[..k], &body[k..]),
                None => ("0", body),
            };
            let im_s = match im_s {
                "" | "+" => "1",
                "-" => "-1",
                x => x,
            };
            Ok(HPComplex { re: real(re_s)?, im: real(im_s)? })
        } else {
            Ok(HPComplex { re: real(&t)?, im: Float::new(bits) })
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn set_prec(&mut self, bits: u32) {
        self.re.set_prec(bits);
        self.im.set_prec(bits);
    }

    pub fn with_prec(mut self, bits: u32) -> Self {
        self.set_prec(bits);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        HPComplex { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, &self.re * &self.re + &self.im * &self.im)
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    /// Principal argument in (−π, π].
    pub fn arg(&self) -> Float {
        let p = self.prec();
        if self.im.is_zero() {
            // −0 must not select Arg = −π
            let zero = Float::new(p);
            return Float::with_val(p, zero.atan2_ref(&self.re));
        }
        Float::with_val(p, self.im.atan2_ref(&self.re))
    }

    /// Magnitude as f64 (0 for exact zero); used for error bookkeeping.
    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    /// log10 of |z|, −inf for zero; safe for magnitudes outside f64 range.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let a = self.abs();
        let (m, e) = a.to_f64_exp();
        m.abs().log10() + (e as f64) * std::f64::consts::LOG10_2
    }

    pub fn mul_i(&self) -> Self {
        HPComplex { re: Float::with_val(self.im.prec(), -&self.im), im: self.re.clone() }
    }

    pub fn mul_real(&self, x: &Float) -> Self {
        let p = self.prec().max(x.prec());
        HPComplex { re: Float::with_val(p, &self.re * x), im: Float::with_val(p, &self.im * x) }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        let p = self.prec();
        HPComplex { re: Float::with_val(p, &self.re * n), im: Float::with_val(p, &self.im * n) }
    }

    pub fn div_int(&self, n: i64) -> Self {
        let p = self.prec();
        HPComplex { re: Float::with_val(p, &self.re / n), im: Float::with_val(p, &self.im / n) }
    }

    pub fn mul_integer(&self, n: &Integer) -> Self {
        let p = self.prec();
        HPComplex { re: Float::with_val(p, &self.re * n), im: Float::with_val(p, &self.im * n) }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Singular("reciprocal of zero".into()));
        }
        let p = self.prec();
        let n = self.norm_sqr();
        Ok(HPComplex {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// Accumulates `a * b` into self.
    pub fn add_mul(&mut self, a: &Self, b: &Self) {
        let p = self.prec();
        let re = Float::with_val(p, &a.re * &b.re - &a.im * &b.im);
        let im = Float::with_val(p, &a.re * &b.im + &a.im * &b.re);
        self.re += re;
        self.im += im;
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let r = Float::with_val(p, self.re.exp_ref());
        let mut s = self.im.clone();
        let mut c = Float::new(p);
        s.sin_cos_mut(&mut c);
        HPComplex { re: Float::with_val(p, &r * &c), im: Float::with_val(p, &r * &s) }
    }

    /// e^{iθ} for real θ.
    pub fn cis(theta: &Float) -> Self {
        let p = theta.prec();
        let mut s = theta.clone();
        let mut c = Float::new(p);
        s.sin_cos_mut(&mut c);
        HPComplex { re: c, im: s }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("logarithm of zero".into()));
        }
        let p = self.prec();
        Ok(HPComplex { re: Float::with_val(p, self.abs().ln()), im: self.arg() })
    }

    /// Principal square root (branch cut on the negative real axis, sqrt(−1) = i).
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return HPComplex::zero(p);
        }
        let r = self.abs();
        let a = Float::with_val(p, Float::with_val(p, &r + &self.re) / 2u32).sqrt();
        let b = Float::with_val(p, Float::with_val(p, &r - &self.re) / 2u32).sqrt();
        if self.im.is_sign_negative() && !self.im.is_zero() {
            HPComplex { re: a, im: -b }
        } else {
            HPComplex { re: a, im: b }
        }
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn powi(&self, n: i64) -> Result<Self> {
        let p = self.prec();
        if n == 0 {
            return Ok(HPComplex::one(p));
        }
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = HPComplex::one(p);
        let mut sq = base;
        loop {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = &sq * &sq;
        }
        Ok(acc)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Decimal rendering of each part with `digits` significant digits.
    pub fn to_strings(&self, digits: usize) -> (String, String) {
        (fmt_float(&self.re, digits), fmt_float(&self.im, digits))
    }
}

/// Scientific notation with `digits` significant digits; exact zero prints as "0".
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let d = digits.max(1);
    format!("{:.*e}", d - 1, x)
}

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

impl fmt::Debug for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.to_strings(20);
        write!(f, "({a} + {b}i)")
    }
}

impl fmt::Display for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = ((self.prec() as f64) * std::f64::consts::LOG10_2) as usize;
        let (a, b) = self.to_strings(d.max(2));
        write!(f, "{a} + {b}i")
    }
}

impl<'a> Add<&'a HPComplex> for &'a HPComplex {
    type Output = HPComplex;
    fn add(self, o: &HPComplex) -> HPComplex {
        let p = self.prec().max(o.prec());
        HPComplex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl<'a> Sub<&'a HPComplex> for &'a HPComplex {
    type Output = HPComplex;
    fn sub(self, o: &HPComplex) -> HPComplex {
        let p = self.prec().max(o.prec());
        HPComplex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl<'a> Mul<&'a HPComplex> for &'a HPComplex {
    type Output = HPComplex;
    fn mul(self, o: &HPComplex) -> HPComplex {
        let p = self.prec().max(o.prec());
        HPComplex {
            re: Float::with_val(p, &self.re * &o.re - &self.im * &o.im),
            im: Float::with_val(p, &self.re * &o.im + &self.im * &o.re),
        }
    }
}

impl Add for HPComplex {
    type Output = HPComplex;
    fn add(self, o: HPComplex) -> HPComplex {
        &self + &o
    }
}

impl Sub for HPComplex {
    type Output = HPComplex;
    fn sub(self, o: HPComplex) -> HPComplex {
        &self - &o
    }
}

impl Mul for HPComplex {
    type Output = HPComplex;
    fn mul(self, o: HPComplex) -> HPComplex {
        &self * &o
    }
}

impl Neg for HPComplex {
    type Output = HPComplex;
    fn neg(self) -> HPComplex {
        HPComplex { re: -self.re, im: -self.im }
    }
}

impl Neg for &HPComplex {
    type Output = HPComplex;
    fn neg(self) -> HPComplex {
        self.clone().neg()
    }
}

impl AddAssign<&HPComplex> for HPComplex {
    fn add_assign(&mut self, o: &HPComplex) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&HPComplex> for HPComplex {
    fn sub_assign(&mut self, o: &HPComplex) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&HPComplex> for HPComplex {
    fn mul_assign(&mut self, o: &HPComplex) {
        let r = &*self * o;
        *self = r;
    }
}
