//! Arbitrary-precision scalars, principal-branch powers, exact combinatorics
//! and the quadrature rule shared by every integral in the crate.

mod complex;
mod quad;

pub use complex::{fmt_float, pi, HPComplex};
pub use quad::{quad_nodes, DeNodes, Node, NodeRange};

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard digits carried on top of the requested output digits.
pub const GUARD_DIGITS: u32 = 10;

pub fn bits_for_digits(digits: u32) -> u32 {
    ((digits as f64) * std::f64::consts::LOG2_10).ceil() as u32 + 4
}

pub fn digits_of_bits(bits: u32) -> u32 {
    ((bits.saturating_sub(4)) as f64 * std::f64::consts::LOG10_2).floor() as u32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBudget {
    pub digits: u32,
    pub quad_level: u32,
    pub series_tail_target: f64,
}

impl PrecisionBudget {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < 15 {
            return Err(Error::Argument(format!("digits must be at least 15, got {digits}")));
        }
        Ok(PrecisionBudget {
            digits,
            quad_level: default_quad_level(digits),
            series_tail_target: 10f64.powi(-((digits + GUARD_DIGITS) as i32)),
        })
    }

    pub fn with_quad_level(mut self, level: u32) -> Self {
        self.quad_level = level.max(1);
        self
    }

    /// Working precision in bits (digits plus guard digits).
    pub fn bits(&self) -> u32 {
        bits_for_digits(self.digits + GUARD_DIGITS)
    }

    pub fn work_digits(&self) -> u32 {
        self.digits + GUARD_DIGITS
    }
}

/// Step 2^-level for the quadrature rules; the increments' rule is the
/// limiting one and reaches about 10^-34 at level 4 and 10^-55 at level 5.
pub fn default_quad_level(digits: u32) -> u32 {
    if digits <= 30 {
        4
    } else if digits <= 50 {
        5
    } else if digits <= 95 {
        6
    } else {
        7
    }
}

/// Principal-branch power exp(s·Log z), −π < Arg z ≤ π.
pub fn cpow(z: &HPComplex, s: &HPComplex) -> Result<HPComplex> {
    if z.is_zero() {
        if s.re.is_sign_positive() && !s.re.is_zero() {
            return Ok(HPComplex::zero(z.prec().max(s.prec())));
        }
        return Err(Error::Domain("0 raised to a power with nonpositive real part".into()));
    }
    if s.im.is_zero() && s.re.is_integer() {
        if let Some(n) = s.re.to_integer().and_then(|n| n.to_i64()) {
            return z.powi(n);
        }
    }
    let twice = Float::with_val(s.prec(), &s.re * 2u32);
    if s.im.is_zero() && twice.is_integer() {
        // half-integer: z^n · sqrt(z) with the principal square root
        if let Some(m) = twice.to_integer().and_then(|n| n.to_i64()) {
            let n = (m - 1).div_euclid(2);
            return Ok(&z.powi(n)? * &z.sqrt());
        }
    }
    Ok((s * &z.ln()?).exp())
}

/// Principal power with a real half-integer exponent given as twice its value.
pub fn cpow_half(z: &HPComplex, twice_exp: i64) -> Result<HPComplex> {
    if twice_exp % 2 == 0 {
        return z.powi(twice_exp / 2);
    }
    if z.is_zero() {
        if twice_exp > 0 {
            return Ok(HPComplex::zero(z.prec()));
        }
        return Err(Error::Domain("0 raised to a negative power".into()));
    }
    let n = (twice_exp - 1).div_euclid(2);
    Ok(&z.powi(n)? * &z.sqrt())
}

/// Γ(n) = (n−1)! for positive integers.
pub fn gamma_int(n: i64, bits: u32) -> Result<HPComplex> {
    if n < 1 {
        return Err(Error::Domain(format!("gamma_int requires n >= 1, got {n}")));
    }
    Ok(HPComplex::from_integer(&Integer::from(Integer::factorial((n - 1) as u32)), bits))
}

/// Binomial coefficient C(n, k), zero outside 0 ≤ k ≤ n.
pub fn binomial(n: i64, k: i64) -> Integer {
    if k < 0 || n < 0 || k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

/// A^{[m]}_{n} = C(m_r, n_r)·C(m_r+m_{r−1}−n_r, n_{r−1})⋯C(m_r+…+m_1−n_r−…−n_2, n_1).
pub fn a_coefficient(n: &[i64], m: &[i64]) -> Result<Integer> {
    if n.len() != m.len() {
        return Err(Error::Argument(format!(
            "a_coefficient: length mismatch ({} vs {})",
            n.len(),
            m.len()
        )));
    }
    let r = n.len();
    let mut acc = Integer::from(1);
    let mut upper = 0i64;
    for j in (0..r).rev() {
        if n[j] < 0 {
            return Err(Error::Argument("a_coefficient: negative index".into()));
        }
        upper += m[j];
        if upper < 0 {
            return Err(Error::Argument("a_coefficient: negative upper index".into()));
        }
        acc *= binomial(upper, n[j]);
        if acc == 0 {
            return Ok(acc);
        }
        upper -= n[j];
    }
    Ok(acc)
}
