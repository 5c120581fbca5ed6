//! Cusp forms given by q-expansions: Δ, unary theta functions and forms read
//! from coefficient files, with evaluation and multiplier inference.

mod delta;
mod form;
mod multiplier;
mod parse;
mod qexp;
mod theta;

pub use delta::{delta_qexp, ramanujan_tau};
pub use form::{chart_element, Chart, Form, FormRef};
pub use multiplier::{default_samples, infer_multiplier, jfactor_cocycle, MultiplierTable};
pub use parse::{load_qexp, parse_qexp};
pub use qexp::{calibrate_bound, CoefficientBound, EvalOut, MultiplierMode, QExpansion, Term};
pub use theta::theta_unary;

use crate::error::Result;
use crate::hp::{HPComplex, PrecisionBudget};

/// Σ c(ν)e^{2πiντ} with the budget's absolute tail target.
pub fn eval(f: &QExpansion, tau: &HPComplex, budget: &PrecisionBudget) -> Result<EvalOut> {
    f.eval(tau, budget)
}
