use rug::Rational;

use super::qexp::{CoefficientBound, MultiplierMode, QExpansion, Term};
use crate::error::{Error, Result};
use crate::group::Weight;
use crate::hp::HPComplex;

/// f_{j,N} = (1/2N)·Σ_{n ≡ j mod 2N} n·q^{n²/4N}, all terms with exponent ≤ n_max.
/// Weight 3/2, declared level 4N, multiplier inferred.
pub fn theta_unary(j: i64, n: i64, n_max: u64, bits: u32) -> Result<QExpansion> {
    if n < 2 || j < 1 || j > n - 1 {
        return Err(Error::Argument(format!("theta_unary needs 1 <= j <= N-1, got j={j}, N={n}")));
    }
    let den = 4 * n as u64;
    let lim = n_max.saturating_mul(den);
    let mut terms = Vec::new();
    // |m| runs over the residues ±j mod 2N; each square arises from one signed m
    let mut a: u64 = 1;
    while a * a <= lim {
        for m in [a as i64, -(a as i64)] {
            if (m - j).rem_euclid(2 * n) == 0 {
                let c = Rational::from((m, 2 * n));
                terms.push(Term { num: a * a, coeff: HPComplex::from_rational(&c, bits) });
            }
        }
        a += 1;
    }
    let bound = CoefficientBound { c: 1.0 / (n as f64).sqrt(), alpha: 0.5 };
    QExpansion::new(Weight(3), 4 * n, den, terms, lim, MultiplierMode::Inferred, bound)
}
