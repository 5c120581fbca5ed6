use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::module::{Ctx, Elem};
use crate::error::{Error, Result};
use crate::group::GroupElement;

pub type CochainFn = Arc<dyn Fn(&[GroupElement]) -> Result<Elem> + Send + Sync>;

/// A map from n-tuples of group elements to module elements.
#[derive(Clone)]
pub struct Cochain {
    pub arity: usize,
    eval: CochainFn,
}

impl Cochain {
    pub fn new(arity: usize, eval: CochainFn) -> Cochain {
        Cochain { arity, eval }
    }

    /// Constant 0-cochain.
    pub fn constant(a: Elem) -> Cochain {
        Cochain::new(0, Arc::new(move |_| Ok(a.clone())))
    }

    pub fn at(&self, gs: &[GroupElement]) -> Result<Elem> {
        if gs.len() != self.arity {
            return Err(Error::Argument(format!("cochain of arity {} applied to {} elements", self.arity, gs.len())));
        }
        (self.eval)(gs)
    }

    /// Same cochain, remembering every value it has produced.
    pub fn memoized(self) -> Cochain {
        let cache: Arc<Mutex<HashMap<Vec<GroupElement>, Elem>>> = Arc::default();
        let inner = self.eval;
        Cochain::new(
            self.arity,
            Arc::new(move |gs| {
                if let Some(v) = cache.lock().unwrap().get(gs) {
                    return Ok(v.clone());
                }
                let v = inner(gs)?;
                cache.lock().unwrap().insert(gs.to_vec(), v.clone());
                Ok(v)
            }),
        )
    }
}

fn product(gs: &[GroupElement]) -> GroupElement {
    gs.iter().fold(GroupElement::identity(), |acc, g| acc.mul(g))
}

/// dσ(g_1, …, g_{n+1}) = σ(g_2, …, g_{n+1})∘g_1 + Σ_j (−1)^j σ(…, g_{j+1}g_j, …) + (−1)^{n+1} σ(g_1, …, g_n).
pub fn bar_differential(ctx: &Ctx, sigma: &Cochain, tuple: &[GroupElement]) -> Result<Elem> {
    let n = sigma.arity;
    if tuple.len() != n + 1 {
        return Err(Error::Argument(format!("d of an {n}-cochain needs {} elements, got {}", n + 1, tuple.len())));
    }
    let mut acc = ctx.act(&sigma.at(&tuple[1..])?, &tuple[0])?;
    for j in 1..=n {
        let mut args = Vec::with_capacity(n);
        args.extend_from_slice(&tuple[..j - 1]);
        args.push(tuple[j].mul(&tuple[j - 1]));
        args.extend_from_slice(&tuple[j + 1..]);
        let v = sigma.at(&args)?;
        acc = if j % 2 == 0 { ctx.add(&acc, &v)? } else { ctx.sub(&acc, &v)? };
    }
    let last = sigma.at(&tuple[..n])?;
    if (n + 1) % 2 == 0 {
        ctx.add(&acc, &last)
    } else {
        ctx.sub(&acc, &last)
    }
}

/// dσ as a cochain of arity n+1.
pub fn coboundary(ctx: &Arc<Ctx>, sigma: &Cochain) -> Cochain {
    let (ctx, sigma) = (ctx.clone(), sigma.clone());
    Cochain::new(sigma.arity + 1, Arc::new(move |gs| bar_differential(&ctx, &sigma, gs)))
}

/// (φ₁ ∪ φ₂)(g_1, …, g_{m+n}) = (−1)^{mn} φ₁(g_{n+1}, …, g_{n+m})∘(g_n⋯g_1) · φ₂(g_1, …, g_n).
pub fn cup(ctx: &Arc<Ctx>, phi1: &Cochain, phi2: &Cochain) -> Cochain {
    let (m, n) = (phi1.arity, phi2.arity);
    let (ctx, phi1, phi2) = (ctx.clone(), phi1.clone(), phi2.clone());
    Cochain::new(
        m + n,
        Arc::new(move |gs| {
            if gs.len() != m + n {
                return Err(Error::Argument(format!("cup product of arity {} applied to {} elements", m + n, gs.len())));
            }
            let rev: Vec<GroupElement> = gs[..n].iter().rev().cloned().collect();
            let left = ctx.act(&phi1.at(&gs[n..])?, &product(&rev))?;
            let v = ctx.mul(&left, &phi2.at(&gs[..n])?)?;
            Ok(if (m * n) % 2 == 1 { ctx.scale(&v, -1) } else { v })
        }),
    )
}
