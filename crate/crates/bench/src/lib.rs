//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use periodlab::{Engine, Form, FormRef, GroupElement, HPComplex, PrecisionBudget};

pub fn engine(digits: u32) -> Engine {
    Engine::new(PrecisionBudget::new(digits).expect("digits"))
}

pub fn delta(bits: u32) -> FormRef {
    Arc::new(Form::delta(bits).expect("delta"))
}

pub fn theta(bits: u32) -> FormRef {
    Arc::new(Form::theta(1, 2, bits).expect("theta"))
}

/// A fixed word of moderate size in SL2(Z).
pub fn word() -> GroupElement {
    GroupElement::new(3, -1, 7, -2).expect("det 1")
}

pub fn tau(bits: u32) -> HPComplex {
    HPComplex::from_f64(-0.2, -1.1, bits)
}
