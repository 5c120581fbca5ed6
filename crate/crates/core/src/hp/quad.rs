//! Double-exponential quadrature on (0, ∞) for exponentially decaying integrands.
//!
//! Nodes t_k = σ·exp(x_k − e^{−x_k}) with x_k = kh, h = 2^-level, weights
//! σ·h·(1 + e^{−x_k})·exp(x_k − e^{−x_k}). The scale σ is matched to the decay
//! rate of the integrand. The even-indexed subset with doubled weights is the
//! rule at step 2h; the difference of the two sums is the error estimate.

use rug::Float;

use super::complex::HPComplex;
use super::digits_of_bits;
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct Node {
    pub t: Float,
    pub w: Float,
    /// belongs to the step-2h rule
    pub coarse: bool,
}

#[derive(Clone, Debug)]
pub struct DeNodes {
    pub level: u32,
    pub bits: u32,
    pub range: NodeRange,
    pub nodes: Vec<Node>,
}

/// Rule parameters: scale σ and the kept interval [t_lo, t_hi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeRange {
    pub scale: f64,
    pub log_t_lo: f64,
    pub log_t_hi: f64,
}

impl NodeRange {
    /// For integrands bounded near 0 and decaying like t^deg·e^{−2πν t}.
    pub fn for_decay(bits: u32, nu_min: f64, deg: f64) -> Self {
        let d = digits_of_bits(bits) as f64 + 5.0;
        let target = d * std::f64::consts::LN_10;
        let rate = 2.0 * std::f64::consts::PI * nu_min;
        let mut t: f64 = 1.0 / rate;
        while rate * t - deg.max(0.0) * (t * rate).ln().max(0.0) < target {
            t *= 1.05;
        }
        NodeRange { scale: 1.0 / rate, log_t_lo: -target, log_t_hi: t.ln() }
    }

    pub fn key(&self) -> (u64, u64, u64) {
        (self.scale.to_bits(), self.log_t_lo.to_bits(), self.log_t_hi.to_bits())
    }
}

impl DeNodes {
    pub fn new(level: u32, bits: u32, range: NodeRange) -> Self {
        let h = 0.5f64.powi(level as i32);
        let lo = (range.log_t_lo - range.scale.ln()).min(-1.0);
        let hi = (range.log_t_hi - range.scale.ln()).max(1.0);
        // invert y = x − e^{−x} in f64 to bound the index range
        let inv = |y: f64| {
            let mut x = if y < 0.0 { -(-y).ln() } else { y };
            for _ in 0..60 {
                let g = x - (-x).exp() - y;
                x -= g / (1.0 + (-x).exp());
            }
            x
        };
        let k_lo = (inv(lo) / h).floor() as i64;
        let k_hi = (inv(hi) / h).ceil() as i64;
        let hp = Float::with_val(bits, 1) >> level;
        let sigma = Float::with_val(bits, range.scale);
        let mut nodes = Vec::with_capacity((k_hi - k_lo + 1) as usize);
        for k in k_lo..=k_hi {
            let x = Float::with_val(bits, &hp * k);
            let emx = Float::with_val(bits, -&x).exp();
            let u = Float::with_val(bits, &x - &emx).exp();
            let t = Float::with_val(bits, &u * &sigma);
            let w = Float::with_val(bits, &hp * Float::with_val(bits, &emx + 1u32)) * &t;
            nodes.push(Node { t, w, coarse: k % 2 == 0 });
        }
        DeNodes { level, bits, range, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫₀^∞ f(t) dt; returns (value, |fine − coarse|).
    pub fn integrate<F>(&self, mut f: F) -> Result<(HPComplex, Float)>
    where
        F: FnMut(&Float) -> Result<HPComplex>,
    {
        let mut fine = HPComplex::zero(self.bits);
        let mut coarse = HPComplex::zero(self.bits);
        for n in &self.nodes {
            let v = f(&n.t)?.mul_real(&n.w);
            if n.coarse {
                coarse += &v;
                coarse += &v;
            }
            fine += &v;
        }
        let err = (&fine - &coarse).abs();
        Ok((fine, err))
    }
}

/// Node/weight list for ∫₀^∞ at the given level, tuned for integrands decaying like e^{−t}.
pub fn quad_nodes(level: u32, bits: u32) -> Vec<(Float, Float)> {
    let range = NodeRange::for_decay(bits, 1.0 / (2.0 * std::f64::consts::PI), 12.0);
    DeNodes::new(level.max(1), bits, range).nodes.into_iter().map(|n| (n.t, n.w)).collect()
}
