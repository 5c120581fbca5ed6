//! Cochains on Γ₀(N) with values in polynomial or function modules, the bar
//! differential and cup product, and the depth-n cocycle checks.

mod checks;
mod cochain;
mod module;

pub use checks::{antisymmetry_residual, depth_cocycle_residual, lincomb_report, sigma_partition, z1_depth_checker, Mode, Periods};
pub use cochain::{bar_differential, coboundary, cup, Cochain, CochainFn};
pub use module::{default_taus, Ctx, Elem, Grade, SampleFn, Value};
