//! Product quadrature for nested integrals along one vertical line.
//!
//! Every point of an iterated integral with vertical inner paths lies on the
//! line {base + iu}; w_j = base + i(t_1 + … + t_j). Form values are cached by
//! the multiset of node indices, so the same value serves every ordering and
//! every kernel evaluated on that line.
//!
//! Above a cusp the first variable uses the trapezoid rule in log u: the
//! integrand decays double-exponentially at both ends in s = ln u, and the
//! rate is uniform in the cusp width. Increments use the exp-exp rule.

use std::collections::HashMap;
use std::f64::consts::LN_10;
use std::sync::{Arc, Mutex};

use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::forms::{Chart, FormRef};
use crate::hp::{DeNodes, HPComplex, NodeRange, PrecisionBudget};

/// Polynomial growth allowed for kernels when deciding negligibility.
const KERNEL_DEG: f64 = 48.0;
/// Most nested levels a cache key can hold.
pub const MAX_DEPTH: usize = 8;

#[derive(Clone, Debug)]
pub enum Line {
    /// a + iu above a rational cusp, u ∈ (0, ∞)
    Cusp(Rational),
    /// b + iu from an interior point b, u ∈ [0, ∞)
    Point(HPComplex),
}

impl Line {
    fn key(&self) -> String {
        match self {
            Line::Cusp(a) => format!("c{a}"),
            Line::Point(b) => format!("p{}|{}", b.re.to_string_radix(16, None), b.im.to_string_radix(16, None)),
        }
    }

    /// base of the line at precision `bits`
    pub fn base(&self, bits: u32) -> HPComplex {
        match self {
            Line::Cusp(a) => HPComplex::from_rational(a, bits),
            Line::Point(b) => b.clone().with_prec(bits),
        }
    }
}

/// Per-dimension factor of the integrand, and how factors of successive
/// dimensions are combined.
pub trait Kernel {
    /// entries contributed by dimension j
    fn width(&self, j: usize) -> usize;
    /// true: entries multiply pointwise; false: outer (tensor) product
    fn pointwise(&self) -> bool;
    /// factor of dimension j at offset u = t_1 + … + t_j with increment t = t_j
    fn factor(&self, j: usize, u: &Float, t: &Float, out: &mut Vec<HPComplex>) -> Result<()>;
}

/// Value and error estimate of a nested integral, entry by entry.
#[derive(Clone, Debug)]
pub struct Nested {
    pub value: Vec<HPComplex>,
    /// |fine − coarse| per entry
    pub delta: Vec<f64>,
    /// posterior estimate: δ²/|value|, floored at the working precision
    pub err: Vec<f64>,
}

struct FormSlot {
    chart: Option<Chart>,
    ln_negl: f64,
    /// beyond this u the bound decreases monotonically
    u_peak: f64,
    values: HashMap<u128, HPComplex>,
}

#[derive(Default)]
struct LineCache {
    slots: HashMap<(String, u64), FormSlot>,
}

/// Quadrature state shared by all integrals at one precision budget.
pub struct Engine {
    budget: PrecisionBudget,
    lines: Mutex<HashMap<String, Arc<Mutex<LineCache>>>>,
    inner: Mutex<HashMap<u64, Arc<DeNodes>>>,
}

struct Dim<'a> {
    /// (t, weight, coarse, index)
    nodes: Vec<(&'a Float, &'a Float, bool, u16)>,
    outer: bool,
}

impl Engine {
    pub fn new(budget: PrecisionBudget) -> Self {
        Engine { budget, lines: Mutex::new(HashMap::new()), inner: Mutex::new(HashMap::new()) }
    }

    pub fn budget(&self) -> &PrecisionBudget {
        &self.budget
    }

    pub fn bits(&self) -> u32 {
        self.budget.bits()
    }

    pub fn level(&self) -> u32 {
        self.budget.quad_level
    }

    /// Fresh engine one quadrature level finer.
    pub fn refined(&self) -> Engine {
        Engine::new(self.budget.clone().with_quad_level(self.budget.quad_level + 1))
    }

    fn h(&self) -> f64 {
        0.5f64.powi(self.level() as i32)
    }

    fn inner_nodes(&self, nu_min: f64) -> Arc<DeNodes> {
        let key = nu_min.to_bits();
        let mut m = self.inner.lock().unwrap();
        m.entry(key)
            .or_insert_with(|| {
                Arc::new(DeNodes::new(self.level(), self.bits(), NodeRange::for_decay(self.bits(), nu_min, KERNEL_DEG)))
            })
            .clone()
    }

    fn line_cache(&self, line: &Line) -> Arc<Mutex<LineCache>> {
        let mut m = self.lines.lock().unwrap();
        m.entry(line.key()).or_default().clone()
    }

    /// ln bound of |f| at offset u on the line.
    fn ln_bound(f: &FormRef, line: &Line, chart: Option<&Chart>, u: f64) -> f64 {
        match (line, chart) {
            (Line::Cusp(_), Some(c)) => f.ln_bound_on_line(c, u),
            (Line::Point(b), _) => f.ln_bound_at(b.im.to_f64() + u),
            _ => f64::INFINITY,
        }
    }

    fn slot<'c>(&self, cache: &'c mut LineCache, f: &FormRef, line: &Line, nu_key: u64) -> Result<&'c mut FormSlot> {
        let key = (f.id().to_string(), nu_key);
        if !cache.slots.contains_key(&key) {
            let chart = match line {
                Line::Cusp(a) => Some(f.chart(a, &self.budget)?),
                Line::Point(_) => None,
            };
            // scan a fixed grid so the threshold does not depend on the caller
            let mut peak = f64::NEG_INFINITY;
            let mut u_peak = 0.0;
            for k in -240..=40 {
                let u = (k as f64 / 4.0).exp();
                let v = Self::ln_bound(f, line, chart.as_ref(), u);
                if v > peak {
                    peak = v;
                    u_peak = u;
                }
            }
            if let Line::Point(_) = line {
                let v0 = Self::ln_bound(f, line, None, 0.0);
                if v0 >= peak {
                    peak = v0;
                    u_peak = 0.0;
                }
            }
            let ln_negl = peak - (self.budget.work_digits() as f64 + 10.0) * LN_10;
            cache.slots.insert(key.clone(), FormSlot { chart, ln_negl, u_peak, values: HashMap::new() });
        }
        Ok(cache.slots.get_mut(&key).unwrap())
    }

    fn outer_nodes(&self, f: &FormRef, line: &Line, slot: &FormSlot) -> Vec<(Float, Float, bool, i32)> {
        let h = self.h();
        let bits = self.bits();
        let keep = |k: i32| {
            let s = k as f64 * h;
            let u = s.exp();
            Self::ln_bound(f, line, slot.chart.as_ref(), u) + s + KERNEL_DEG * s.max(0.0) >= slot.ln_negl
        };
        // start from the peak and walk outwards
        let k0 = (slot.u_peak.max(1e-300).ln() / h).round() as i32;
        let mut lo = k0;
        while keep(lo - 1) || keep(lo - 2) {
            lo -= 1;
        }
        let mut hi = k0;
        while keep(hi + 1) || keep(hi + 2) {
            hi += 1;
        }
        let hf = Float::with_val(bits, 1) >> self.level();
        (lo..=hi)
            .map(|k| {
                let s = Float::with_val(bits, &hf * k);
                let u = s.exp();
                let w = Float::with_val(bits, &u * &hf);
                (u, w, k % 2 == 0, k)
            })
            .collect()
    }

    /// ∫ over the nested simplex of ∏_j f_j(base + iu_j)·K_j, times i^r.
    pub fn nested<K: Kernel>(&self, line: &Line, forms: &[FormRef], kernel: &K) -> Result<Nested> {
        let r = forms.len();
        if r == 0 || r > MAX_DEPTH {
            return Err(Error::Argument(format!("nested integrals need depth 1..={MAX_DEPTH}, got {r}")));
        }
        let bits = self.bits();
        let len = total_len(kernel, 0, r);
        if forms.iter().any(|f| f.is_zero()) {
            return Ok(Nested { value: vec![HPComplex::zero(bits); len], delta: vec![0.0; len], err: vec![0.0; len] });
        }
        let nu_min = forms.iter().map(|f| f.nu_min()).fold(f64::INFINITY, f64::min);
        let nu_key = nu_min.to_bits();
        let inner = self.inner_nodes(nu_min);
        let cache = self.line_cache(line);
        let mut cache = cache.lock().unwrap();
        for f in forms {
            self.slot(&mut cache, f, line, nu_key)?;
        }
        let outer_owned = match line {
            Line::Cusp(_) => {
                let slot = self.slot(&mut cache, &forms[0], line, nu_key)?;
                Some(self.outer_nodes(&forms[0], line, slot))
            }
            Line::Point(_) => None,
        };
        let inner_dim = Dim {
            nodes: inner.nodes.iter().enumerate().map(|(i, n)| (&n.t, &n.w, n.coarse, i as u16)).collect(),
            outer: false,
        };
        let first = match &outer_owned {
            Some(o) => Dim { nodes: o.iter().map(|(t, w, c, _)| (t, w, *c, 0u16)).collect(), outer: true },
            None => Dim { nodes: inner_dim.nodes.clone(), outer: false },
        };
        let outer_k: Vec<i32> = outer_owned.as_ref().map(|o| o.iter().map(|x| x.3).collect()).unwrap_or_default();
        let base = line.base(bits + 32);
        let mut run = Run {
            engine: self,
            line,
            forms,
            kernel,
            nu_key,
            cache: &mut cache,
            first: &first,
            inner: &inner_dim,
            inner_t: &inner,
            outer_k: &outer_k,
            base,
            bits,
        };
        let fine = run.sum(0, &Key::default(), &Float::new(bits), false)?;
        let coarse = run.sum(0, &Key::default(), &Float::new(bits), true)?;
        let ir = HPComplex::i(bits).powi(r as i64)?;
        let value: Vec<HPComplex> = fine.iter().map(|v| v * &ir).collect();
        let delta: Vec<f64> = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs_f64()).collect();
        let floor = 10f64.powi(-(self.budget.work_digits() as i32));
        let scale = value.iter().map(|v| v.abs_f64()).fold(0.0, f64::max);
        let err = delta
            .iter()
            .zip(&value)
            .map(|(d, v)| {
                let m = v.abs_f64().max(scale * 1e-30).max(f64::MIN_POSITIVE);
                let rich = if *d == 0.0 { 0.0 } else { d * d / m };
                rich.max(floor * m)
            })
            .collect();
        Ok(Nested { value, delta, err })
    }
}

fn total_len<K: Kernel>(k: &K, j: usize, r: usize) -> usize {
    if k.pointwise() {
        k.width(0)
    } else {
        (j..r).map(|d| k.width(d)).product()
    }
}

/// Sorted multiset of increment indices plus the outer index.
#[derive(Clone, Default)]
struct Key {
    outer: Option<i32>,
    idx: [u16; MAX_DEPTH],
    n: usize,
}

impl Key {
    fn push_outer(&self, k: i32) -> Key {
        let mut o = self.clone();
        o.outer = Some(k);
        o
    }

    fn push(&self, i: u16) -> Key {
        let mut o = self.clone();
        let mut p = o.n;
        while p > 0 && o.idx[p - 1] > i {
            o.idx[p] = o.idx[p - 1];
            p -= 1;
        }
        o.idx[p] = i;
        o.n += 1;
        o
    }

    fn pack(&self) -> u128 {
        let mut v: u128 = self.n as u128;
        let k = self.outer.map(|k| (k + (1 << 19)) as u128 + 1).unwrap_or(0);
        v |= k << 4;
        for j in 0..self.n {
            v |= (self.idx[j] as u128) << (24 + 12 * j);
        }
        v
    }
}

struct Run<'a, K: Kernel> {
    engine: &'a Engine,
    line: &'a Line,
    forms: &'a [FormRef],
    kernel: &'a K,
    nu_key: u64,
    cache: &'a mut LineCache,
    first: &'a Dim<'a>,
    inner: &'a Dim<'a>,
    inner_t: &'a DeNodes,
    outer_k: &'a [i32],
    base: HPComplex,
    bits: u32,
}

impl<K: Kernel> Run<'_, K> {
    /// f_j at the point described by `key`; zero when negligible.
    fn value(&mut self, j: usize, key: &Key) -> Result<(HPComplex, f64)> {
        let f = &self.forms[j];
        let packed = key.pack();
        let slot = self.cache.slots.get(&(f.id().to_string(), self.nu_key)).unwrap();
        let u_peak = slot.u_peak;
        if let Some(v) = slot.values.get(&packed) {
            return Ok((v.clone(), u_peak));
        }
        let bits = self.bits + 32;
        // canonical sum: outer node then increments in index order
        let mut u = match key.outer {
            Some(k) => Float::with_val(bits, Float::with_val(bits, k) >> self.engine.level()).exp(),
            None => Float::new(bits),
        };
        for i in &key.idx[..key.n] {
            u += &self.inner_t.nodes[*i as usize].t;
        }
        let uf = u.to_f64();
        let ln_b = Engine::ln_bound(f, self.line, slot.chart.as_ref(), uf);
        let v = if ln_b + KERNEL_DEG * uf.max(1.0).ln() < slot.ln_negl {
            HPComplex::zero(self.bits)
        } else {
            match self.line {
                Line::Cusp(a) => f.eval_on_line(a, slot.chart.as_ref().unwrap(), &u, self.bits, slot.ln_negl)?,
                Line::Point(_) => {
                    let w = HPComplex::new(self.base.re.clone(), Float::with_val(bits, &self.base.im + &u));
                    f.eval_point(&w, self.bits)?
                }
            }
        };
        let slot = self.cache.slots.get_mut(&(f.id().to_string(), self.nu_key)).unwrap();
        slot.values.insert(packed, v.clone());
        Ok((v, u_peak))
    }

    fn sum(&mut self, j: usize, prefix: &Key, u_prev: &Float, coarse: bool) -> Result<Vec<HPComplex>> {
        let r = self.forms.len();
        let len = total_len(self.kernel, j, r);
        let mut acc = vec![HPComplex::zero(self.bits); len];
        let dim = if j == 0 { self.first } else { self.inner };
        let mut own = Vec::new();
        let mut scaled = Vec::new();
        for (pos, &(t, w, is_coarse, idx)) in dim.nodes.iter().enumerate() {
            if coarse && !is_coarse {
                continue;
            }
            let key = if dim.outer { prefix.push_outer(self.outer_k[pos]) } else { prefix.push(idx) };
            let (fv, u_peak) = self.value(j, &key)?;
            let u = Float::with_val(self.bits, u_prev + t);
            if fv.is_zero() {
                if j > 0 && u.to_f64() > u_peak {
                    break;
                }
                continue;
            }
            let inner = if j + 1 < r { Some(self.sum(j + 1, &key, &u, coarse)?) } else { None };
            if let Some(v) = &inner {
                if v.iter().all(|x| x.is_zero()) {
                    continue;
                }
            }
            own.clear();
            self.kernel.factor(j, &u, t, &mut own)?;
            let mut s = fv.mul_real(w);
            if coarse {
                s = s.mul_int(2);
            }
            scaled.clear();
            scaled.extend(own.iter().map(|o| o * &s));
            match inner {
                None => {
                    for (a, x) in acc.iter_mut().zip(&scaled) {
                        *a += x;
                    }
                }
                Some(v) if self.kernel.pointwise() => {
                    for ((a, x), y) in acc.iter_mut().zip(&scaled).zip(&v) {
                        a.add_mul(x, y);
                    }
                }
                Some(v) => {
                    let m = v.len();
                    for (p, x) in scaled.iter().enumerate() {
                        if x.is_zero() {
                            continue;
                        }
                        for (q, y) in v.iter().enumerate() {
                            acc[p * m + q].add_mul(x, y);
                        }
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// (i t)^{n} for n = 0..width, the Λ kernel of one dimension.
pub struct PowerKernel {
    pub widths: Vec<usize>,
    pub bits: u32,
}

impl Kernel for PowerKernel {
    fn width(&self, j: usize) -> usize {
        self.widths[j]
    }

    fn pointwise(&self) -> bool {
        false
    }

    fn factor(&self, j: usize, u: &Float, t: &Float, out: &mut Vec<HPComplex>) -> Result<()> {
        // the first increment is measured from the base point
        let x = if j == 0 { u } else { t };
        let it = HPComplex::new(Float::new(self.bits), Float::with_val(self.bits, x));
        let mut p = HPComplex::one(self.bits);
        for n in 0..self.widths[j] {
            if n > 0 {
                p = &p * &it;
            }
            out.push(p.clone());
        }
        Ok(())
    }
}

/// (base + iu − τ_s)^{e_j} at each sample τ_s, exponents given doubled.
pub struct SampleKernel {
    pub base: HPComplex,
    pub taus: Vec<HPComplex>,
    pub twice_exps: Vec<i64>,
    pub bits: u32,
}

impl Kernel for SampleKernel {
    fn width(&self, _j: usize) -> usize {
        self.taus.len()
    }

    fn pointwise(&self) -> bool {
        true
    }

    fn factor(&self, j: usize, u: &Float, _t: &Float, out: &mut Vec<HPComplex>) -> Result<()> {
        for tau in &self.taus {
            let z = HPComplex::new(
                Float::with_val(self.bits, &self.base.re - &tau.re),
                Float::with_val(self.bits, Float::with_val(self.bits, &self.base.im + u) - &tau.im),
            );
            out.push(crate::hp::cpow_half(&z, self.twice_exps[j])?);
        }
        Ok(())
    }
}
