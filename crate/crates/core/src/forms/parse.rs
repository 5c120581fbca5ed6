use std::path::Path;

use rug::{Float, Integer, Rational};

use super::qexp::{calibrate_bound, MultiplierMode, QExpansion, Term};
use crate::error::{Error, Result};
use crate::group::Weight;
use crate::hp::HPComplex;

/// Reads a coefficient file: header "weight <p/q> level <N>", then "<exponent> <re> [<im>]" lines.
pub fn load_qexp(path: &Path, bits: u32) -> Result<QExpansion> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_qexp(&text, bits)
}

pub fn parse_qexp(text: &str, bits: u32) -> Result<QExpansion> {
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut header: Option<(Weight, i64)> = None;
    let mut raw: Vec<(usize, Rational, HPComplex)> = Vec::new();
    let mut last_line = 0;
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = full.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if header.is_none() {
            if fields.len() != 4 || fields[0] != "weight" || fields[2] != "level" {
                return Err(perr(line, "missing header \"weight <k> level <N>\""));
            }
            let w = Weight::parse(fields[1]).map_err(|_| perr(line, "weight must be a half-integer p/q"))?;
            let n: i64 = fields[3].parse().map_err(|_| perr(line, "level must be a positive integer"))?;
            if n < 1 {
                return Err(perr(line, "level must be a positive integer"));
            }
            header = Some((w, n));
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(perr(line, "expected \"<exponent> <re> [<im>]\""));
        }
        let e: Rational = fields[0].parse().map_err(|_| perr(line, "exponent must be a rational p/q"))?;
        if e <= 0 {
            return Err(perr(line, "exponent must be positive"));
        }
        let num = |s: &str| -> Result<Float> {
            let v = Float::parse(s).map_err(|_| perr(line, &format!("bad number '{s}'")))?;
            Ok(Float::with_val(bits, v))
        };
        let re = num(fields[1])?;
        let im = if fields.len() == 3 { num(fields[2])? } else { Float::new(bits) };
        raw.push((line, e, HPComplex::new(re, im)));
    }
    let Some((weight, level)) = header else {
        return Err(perr(last_line.max(1), "missing header \"weight <k> level <N>\""));
    };
    if raw.is_empty() {
        return Err(perr(last_line.max(1), "no coefficient lines"));
    }
    raw.sort_by(|a, b| a.1.cmp(&b.1));
    for w in raw.windows(2) {
        if w[0].1 == w[1].1 {
            return Err(perr(w[0].0.max(w[1].0), &format!("duplicate exponent {}", w[1].1)));
        }
    }
    let mut den = Integer::from(1);
    for (_, e, _) in &raw {
        den.lcm_mut(e.denom());
    }
    let den_u = den.to_u64().ok_or_else(|| perr(1, "exponent denominators too large"))?;
    let mut terms = Vec::with_capacity(raw.len());
    for (line, e, c) in raw {
        let n = Rational::from(&e * &den);
        let num = n.numer().to_u64().ok_or_else(|| perr(line, "exponent too large"))?;
        terms.push(Term { num, coeff: c });
    }
    let complete_to = terms.last().map(|t| t.num).unwrap_or(0);
    let mode = if level == 1 && weight.is_integral() && weight.0 % 4 == 0 {
        MultiplierMode::Trivial
    } else {
        MultiplierMode::Inferred
    };
    let alpha = weight.as_f64() / 2.0;
    let bound = calibrate_bound(&terms, den_u, alpha);
    QExpansion::new(weight, level, den_u, terms, complete_to, mode, bound)
        .map_err(|e| perr(1, &e.to_string()))
}
