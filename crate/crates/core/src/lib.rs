//! Numerical verification toolkit for iterated period integrals of cusp forms:
//! completed multiple L-values, period polynomials, lower-half-plane Eichler
//! integrals and the cocycle relations they satisfy.

pub mod cocycle;
pub mod eichler;
pub mod error;
pub mod forms;
pub mod group;
pub mod hp;
pub mod iterated;
pub mod report;

pub use error::{Error, Result};
pub use forms::{Form, FormRef, QExpansion};
pub use group::{Cusp, GroupElement, Weight};
pub use hp::{a_coefficient, cpow, gamma_int, quad_nodes, HPComplex, PrecisionBudget};
pub use iterated::{Engine, LambdaValue, PeriodPolynomial};
pub use report::IdentityReport;
