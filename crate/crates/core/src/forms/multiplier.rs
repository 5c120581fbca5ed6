use std::collections::HashMap;
use std::sync::RwLock;

use rug::Float;

use super::qexp::QExpansion;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::hp::{cpow_half, HPComplex, PrecisionBudget};

/// Sample points τ with Im τ = 1/|c| and Im γτ ≥ Im τ / 1.1; three per element.
pub fn default_samples(g: &GroupElement, bits: u32) -> Vec<HPComplex> {
    let offsets = [0.0, 0.3, -0.3];
    if g.c == 0 {
        return offsets.iter().map(|&x| HPComplex::from_f64(x, 1.0, bits)).collect();
    }
    let c = g.c.abs() as f64;
    offsets
        .iter()
        .map(|&x| {
            let re = Float::with_val(bits, -g.d) / g.c + Float::with_val(bits, x) / c;
            let im = Float::with_val(bits, 1) / c;
            HPComplex::new(re, im)
        })
        .collect()
}

/// χ(γ) = f(γτ)·j(γ,τ)^{−k}/f(τ), checked for agreement across samples and |χ| = 1.
pub fn infer_multiplier(
    f: &QExpansion,
    g: &GroupElement,
    samples: &[HPComplex],
    budget: &PrecisionBudget,
) -> Result<HPComplex> {
    let bits = budget.bits();
    if g.is_identity() {
        return Ok(HPComplex::one(bits));
    }
    if f.is_zero() {
        return Err(Error::NotModular("multiplier of the zero form is undefined".into()));
    }
    if samples.len() < 3 {
        return Err(Error::Argument("infer_multiplier needs at least three samples".into()));
    }
    let tol = 10f64.powf(-(budget.digits as f64) / 2.0);
    let mut values = Vec::with_capacity(samples.len());
    for tau in samples {
        let tau = tau.clone().with_prec(bits);
        let gt = g.act(&tau)?;
        let y = tau.im.to_f64().min(gt.im.to_f64());
        let ln_target = f.ln_leading(y) - (budget.work_digits() as f64) * std::f64::consts::LN_10;
        let ft = f.eval_ln_target(&tau, ln_target)?.value;
        let fgt = f.eval_ln_target(&gt, ln_target)?.value;
        if ft.log10_abs() < f.ln_leading(tau.im.to_f64()) / std::f64::consts::LN_10 - 6.0 {
            return Err(Error::NotModular("form nearly vanishes at a sample point".into()));
        }
        let j = g.jfactor(&tau)?;
        let jk = cpow_half(&j, -f.weight.0)?;
        values.push((&fgt * &jk).div(&ft)?);
    }
    let mut mean = HPComplex::zero(bits);
    for v in &values {
        mean += v;
    }
    mean = mean.div_int(values.len() as i64);
    for v in &values {
        let spread = (v - &mean).abs_f64();
        if spread > tol {
            return Err(Error::NotModular(format!("multiplier samples for {g} disagree by {spread:e}")));
        }
    }
    let unit = (mean.abs_f64() - 1.0).abs();
    if unit > tol {
        return Err(Error::NotModular(format!("|χ({g})| differs from 1 by {unit:e}")));
    }
    Ok(mean)
}

/// Inferred multiplier values, append-only.
#[derive(Default)]
pub struct MultiplierTable {
    map: RwLock<HashMap<GroupElement, HPComplex>>,
}

impl MultiplierTable {
    pub fn get(&self, g: &GroupElement) -> Option<HPComplex> {
        self.map.read().unwrap().get(g).cloned()
    }

    pub fn insert(&self, g: GroupElement, chi: HPComplex) {
        self.map.write().unwrap().entry(g).or_insert(chi);
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Max over stored pairs of |χ(γ₁γ₂) − χ(γ₁)χ(γ₂)·w(γ₁,γ₂)|, w the j-factor cocycle at weight k.
    pub fn consistency_defect(&self, twice_k: i64, bits: u32) -> Result<f64> {
        let snap: Vec<(GroupElement, HPComplex)> =
            self.map.read().unwrap().iter().map(|(g, v)| (*g, v.clone())).collect();
        let lookup: HashMap<GroupElement, HPComplex> = snap.iter().cloned().collect();
        let tau = HPComplex::from_f64(0.1234, 0.9876, bits);
        let mut worst: f64 = 0.0;
        for (g1, x1) in &snap {
            for (g2, x2) in &snap {
                let Some(x12) = lookup.get(&g1.mul(g2)) else { continue };
                let w = jfactor_cocycle(g1, g2, twice_k, &tau)?;
                let d = (x12 - &(&(x1 * x2) * &w)).abs_f64();
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }
}

/// w(γ₁,γ₂) = j(γ₁,γ₂τ)^k·j(γ₂,τ)^k / j(γ₁γ₂,τ)^k with principal powers.
pub fn jfactor_cocycle(g1: &GroupElement, g2: &GroupElement, twice_k: i64, tau: &HPComplex) -> Result<HPComplex> {
    let a = cpow_half(&g1.jfactor(&g2.act(tau)?)?, twice_k)?;
    let b = cpow_half(&g2.jfactor(tau)?, twice_k)?;
    let c = cpow_half(&g1.mul(g2).jfactor(tau)?, twice_k)?;
    (&a * &b).div(&c)
}
