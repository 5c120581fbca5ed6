use rug::Integer;

use super::qexp::{int_coeff, CoefficientBound, MultiplierMode, QExpansion, Term};
use crate::error::{Error, Result};
use crate::group::Weight;

/// τ(1..=n_max) via Δ = q·(Σ_m (−1)^m (2m+1) q^{m(m+1)/2})^8.
pub fn ramanujan_tau(n_max: usize) -> Vec<i128> {
    if n_max == 0 {
        return Vec::new();
    }
    let len = n_max; // powers q^0..q^{n_max-1} of the eighth power
    let mut sparse: Vec<(usize, i128)> = Vec::new();
    let mut m = 0usize;
    while m * (m + 1) / 2 < len {
        let sign = if m % 2 == 0 { 1 } else { -1 };
        sparse.push((m * (m + 1) / 2, sign * (2 * m as i128 + 1)));
        m += 1;
    }
    let mut acc = vec![0i128; len];
    acc[0] = 1;
    for _ in 0..8 {
        let mut next = vec![0i128; len];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(e, c) in &sparse {
                if i + e >= len {
                    break;
                }
                next[i + e] += a * c;
            }
        }
        acc = next;
    }
    acc
}

/// Δ truncated at q^{n_max}: weight 12, level 1, trivial multiplier.
pub fn delta_qexp(n_max: usize, bits: u32) -> Result<QExpansion> {
    if n_max < 1 {
        return Err(Error::Argument("delta_qexp needs n_max >= 1".into()));
    }
    let tau = ramanujan_tau(n_max);
    let terms: Vec<Term> = tau
        .iter()
        .enumerate()
        .map(|(k, &c)| Term { num: k as u64 + 1, coeff: int_coeff(&Integer::from(c), bits) })
        .collect();
    let mut ratio: f64 = 0.0;
    for (k, &c) in tau.iter().enumerate() {
        ratio = ratio.max((c as f64).abs() / ((k + 1) as f64).powi(6));
    }
    let bound = CoefficientBound { c: 2.0 * ratio, alpha: 6.0 };
    QExpansion::new(Weight::integral(12), 1, 1, terms, n_max as u64, MultiplierMode::Trivial, bound)
}
