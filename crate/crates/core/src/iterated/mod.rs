//! Iterated integrals of cusp forms: completed multiple L-values Λ, partial
//! sums of the twisted multiple L-series, the master integral r* and its
//! expansion as a polynomial in τ.

mod grid;
mod lambda;
mod period;

pub use grid::{Engine, Kernel, Line, Nested, PowerKernel, SampleKernel, MAX_DEPTH};
pub use lambda::{
    gamma_factor, lambda_completed, lambda_table, mellin_identity_residual, multiple_l_partial, partial_terms_for,
    LambdaTable, PartialL,
};
pub use period::{period_polynomial, period_polynomial_at, route_residual, rstar, rstar_at, PeriodPolynomial, PATH_DELTA};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::FormRef;
use crate::group::Cusp;
use crate::hp::HPComplex;
use crate::report::fmt_sci;

/// Depth accepted without `allow_deep`.
pub const DEPTH_CAP: usize = 3;

#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// permit depth above DEPTH_CAP
    pub allow_deep: bool,
    /// extra quadrature levels tried before giving up
    pub max_refine: u32,
}

impl Default for Options {
    fn default() -> Self {
        Options { allow_deep: false, max_refine: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct LambdaValue {
    pub forms: Vec<String>,
    pub basepoint: Cusp,
    pub s: Vec<i64>,
    pub value: HPComplex,
    pub err: f64,
    pub digits: u32,
    pub quad_level: u32,
}

impl LambdaValue {
    pub fn to_json(&self) -> Value {
        let (re, im) = self.value.to_strings(self.digits as usize);
        json!({
            "depth": self.forms.len(),
            "forms": self.forms,
            "basepoint": self.basepoint.to_string(),
            "s": self.s,
            "value": {"re": re, "im": im},
            "err": fmt_sci(self.err),
            "digits": self.digits,
            "quad_level": self.quad_level,
        })
    }
}

pub fn check_depth(forms: &[FormRef], opts: &Options) -> Result<()> {
    let r = forms.len();
    if r == 0 {
        return Err(Error::Argument("at least one form is required".into()));
    }
    if r > MAX_DEPTH || (r > DEPTH_CAP && !opts.allow_deep) {
        return Err(Error::Argument(format!(
            "depth {r} exceeds the supported cap {DEPTH_CAP} (hard limit {MAX_DEPTH})"
        )));
    }
    Ok(())
}

/// Runs `f` on `engine`, then on finer engines while the error exceeds
/// 10^-digits of the result's scale.
pub fn refine<T>(
    engine: &Engine,
    max_refine: u32,
    mut f: impl FnMut(&Engine) -> Result<(T, f64, f64)>,
) -> Result<(T, u32)> {
    let tol = 10f64.powi(-(engine.budget().digits as i32));
    let (v, err, scale) = f(engine)?;
    if err <= tol * scale || scale == 0.0 {
        return Ok((v, engine.level()));
    }
    let mut last = err / scale;
    let mut e = engine.refined();
    for _ in 0..max_refine {
        let (v, err, scale) = f(&e)?;
        if err <= tol * scale || scale == 0.0 {
            return Ok((v, e.level()));
        }
        last = err / scale;
        e = e.refined();
    }
    Err(Error::Refinement { achieved: last, wanted: tol })
}

pub fn form_ids(forms: &[FormRef]) -> Vec<String> {
    forms.iter().map(|f| f.id().to_string()).collect()
}

#[cfg(test)]
mod tests;
