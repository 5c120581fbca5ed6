//! Structured results of identity checks and Λ evaluations, with JSON and CSV output.

use serde_json::{json, Value};

use crate::group::GroupElement;
use crate::hp::{fmt_float, HPComplex};

/// Settings that reproduce a report exactly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunInfo {
    pub digits: u32,
    pub quad_level: u32,
    pub seed: Option<u64>,
    pub n_max: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub identity: String,
    pub depth: usize,
    pub level: i64,
    pub forms: Vec<String>,
    pub gammas: Vec<GroupElement>,
    pub taus: Vec<HPComplex>,
    /// labels of the compared entries (polynomial powers or sample indices)
    pub labels: Vec<String>,
    pub lhs: Vec<HPComplex>,
    pub rhs: Vec<HPComplex>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: Option<f64>,
    pub info: RunInfo,
    pub note: Option<String>,
}

/// Fixed CSV column order.
pub const CSV_HEADER: &str = "identity,depth,level,gamma1,gamma2,residual,tolerance,pass,seconds";

impl IdentityReport {
    /// Report whose residual is the sup-norm of lhs − rhs.
    #[allow(clippy::too_many_arguments)]
    pub fn from_sides(
        identity: &str,
        depth: usize,
        level: i64,
        forms: Vec<String>,
        gammas: Vec<GroupElement>,
        taus: Vec<HPComplex>,
        labels: Vec<String>,
        lhs: Vec<HPComplex>,
        rhs: Vec<HPComplex>,
        tolerance: f64,
        info: RunInfo,
    ) -> Self {
        let residual = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs_f64()).fold(0.0, f64::max);
        Self::with_residual(identity, depth, level, forms, gammas, taus, labels, lhs, rhs, residual, tolerance, info)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_residual(
        identity: &str,
        depth: usize,
        level: i64,
        forms: Vec<String>,
        gammas: Vec<GroupElement>,
        taus: Vec<HPComplex>,
        labels: Vec<String>,
        lhs: Vec<HPComplex>,
        rhs: Vec<HPComplex>,
        residual: f64,
        tolerance: f64,
        info: RunInfo,
    ) -> Self {
        let pass = residual.is_finite() && residual <= tolerance;
        IdentityReport {
            identity: identity.to_string(),
            depth,
            level,
            forms,
            gammas,
            taus,
            labels,
            lhs,
            rhs,
            residual,
            tolerance,
            pass,
            seconds: None,
            info,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn digits(&self) -> usize {
        self.info.digits.max(15) as usize
    }

    pub fn to_json(&self) -> Value {
        let d = self.digits();
        let cx = |z: &HPComplex| {
            let (re, im) = z.to_strings(d);
            json!({"re": re, "im": im})
        };
        json!({
            "identity": self.identity,
            "depth": self.depth,
            "level": self.level,
            "forms": self.forms,
            "gammas": self.gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "taus": self.taus.iter().map(cx).collect::<Vec<_>>(),
            "labels": self.labels,
            "lhs": self.lhs.iter().map(cx).collect::<Vec<_>>(),
            "rhs": self.rhs.iter().map(cx).collect::<Vec<_>>(),
            "residual": fmt_sci(self.residual),
            "tolerance": fmt_sci(self.tolerance),
            "pass": self.pass,
            "seconds": self.seconds,
            "config": {
                "digits": self.info.digits,
                "quad_level": self.info.quad_level,
                "seed": self.info.seed,
                "n_max": self.info.n_max,
            },
            "note": self.note,
        })
    }

    pub fn csv_row(&self) -> String {
        let g = |k: usize| self.gammas.get(k).map(|g| format!("\"{g}\"")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.identity,
            self.depth,
            self.level,
            g(0),
            g(1),
            fmt_sci(self.residual),
            fmt_sci(self.tolerance),
            self.pass,
            self.seconds.map(|s| format!("{s:.3}")).unwrap_or_else(|| "NA".into())
        )
    }
}

/// Residuals printed with 3 significant digits; exact zero as "0".
pub fn fmt_sci(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:.2e}")
    }
}

/// Decimal string of a float at `digits` significant digits.
pub fn fmt_value(x: &rug::Float, digits: usize) -> String {
    fmt_float(x, digits)
}

/// sup|lhs − rhs| divided by max(1, sup|rhs|): absolute for small values, relative for large ones.
pub fn scaled_residual(lhs: &[HPComplex], rhs: &[HPComplex]) -> f64 {
    let diff = lhs.iter().zip(rhs).map(|(a, b)| (a - b).abs_f64()).fold(0.0, f64::max);
    let scale = rhs.iter().map(|b| b.abs_f64()).fold(1.0, f64::max);
    diff / scale
}
