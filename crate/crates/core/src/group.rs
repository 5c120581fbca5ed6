//! SL₂(Z) elements, cusps, automorphy factors, slash actions and seeded
//! random words in Γ₀(N).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hp::{cpow_half, HPComplex};

/// Half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight(pub i64);

impl Weight {
    pub fn integral(k: i64) -> Self {
        Weight(2 * k)
    }

    pub fn is_integral(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// k − 2 as a half-integer.
    pub fn minus_two(self) -> Weight {
        Weight(self.0 - 4)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let q: Rational = s
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("weight '{s}' is not a rational number")))?;
        let twice = Rational::from(&q * 2u32);
        if !twice.denom().eq(&1u32) {
            return Err(Error::Argument(format!("weight {s} is not a half-integer")));
        }
        twice
            .numer()
            .to_i64()
            .map(Weight)
            .ok_or_else(|| Error::Argument(format!("weight {s} out of range")))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl GroupElement {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(Error::Argument(format!("[[{a},{b}],[{c},{d}]] has determinant {det}, expected 1")));
        }
        Ok(GroupElement { a, b, c, d })
    }

    pub const fn identity() -> Self {
        GroupElement { a: 1, b: 0, c: 0, d: 1 }
    }

    pub const fn t() -> Self {
        GroupElement { a: 1, b: 1, c: 0, d: 1 }
    }

    pub const fn s() -> Self {
        GroupElement { a: 0, b: -1, c: 1, d: 0 }
    }

    /// [[1,0],[N,1]]
    pub const fn v(n: i64) -> Self {
        GroupElement { a: 1, b: 0, c: n, d: 1 }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// ±identity: acts trivially on the upper half-plane.
    pub fn is_scalar(&self) -> bool {
        self.b == 0 && self.c == 0
    }

    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        let m = |x: i64, y: i64, z: i64, w: i64| -> i64 {
            let v = (x as i128) * (y as i128) + (z as i128) * (w as i128);
            i64::try_from(v).expect("group element entries overflow i64")
        };
        GroupElement {
            a: m(self.a, o.a, self.b, o.c),
            b: m(self.a, o.b, self.b, o.d),
            c: m(self.c, o.a, self.d, o.c),
            d: m(self.c, o.b, self.d, o.d),
        }
    }

    pub fn inv(&self) -> GroupElement {
        GroupElement { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn pow(&self, k: i64) -> GroupElement {
        let base = if k < 0 { self.inv() } else { *self };
        let mut acc = Self::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn is_in_gamma0(&self, n: i64) -> bool {
        n >= 1 && self.c % n == 0
    }

    pub fn max_entry(&self) -> i64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// γ⁻¹·∞ = −d/c, or ∞ when c = 0.
    pub fn cusp_image(&self) -> Cusp {
        if self.c == 0 {
            Cusp::Infinity
        } else {
            Cusp::Finite(Rational::from((-self.d, self.c)))
        }
    }

    /// Möbius action on cusps.
    pub fn act_cusp(&self, x: &Cusp) -> Cusp {
        match x {
            Cusp::Infinity => {
                if self.c == 0 {
                    Cusp::Infinity
                } else {
                    Cusp::Finite(Rational::from((self.a, self.c)))
                }
            }
            Cusp::Finite(q) => {
                let num = Rational::from(q * self.a) + self.b;
                let den = Rational::from(q * self.c) + self.d;
                if den == 0 {
                    Cusp::Infinity
                } else {
                    Cusp::Finite(num / den)
                }
            }
        }
    }

    /// Exact Möbius action on a rational point.
    pub fn act_rational(&self, x: &Rational) -> Result<Rational> {
        let den = Rational::from(x * self.c) + self.d;
        if den == 0 {
            return Err(Error::Singular(format!("{self} maps {x} to infinity")));
        }
        Ok((Rational::from(x * self.a) + self.b) / den)
    }

    /// j(γ, τ) = cτ + d.
    pub fn jfactor(&self, tau: &HPComplex) -> Result<HPComplex> {
        let p = tau.prec();
        let j = HPComplex {
            re: Float::with_val(p, &tau.re * self.c) + self.d,
            im: Float::with_val(p, &tau.im * self.c),
        };
        if j.is_zero() {
            return Err(Error::Singular(format!("τ = −d/c for {self}")));
        }
        Ok(j)
    }

    /// γτ = (aτ+b)/(cτ+d).
    pub fn act(&self, tau: &HPComplex) -> Result<HPComplex> {
        let p = tau.prec();
        let num = HPComplex {
            re: Float::with_val(p, &tau.re * self.a) + self.b,
            im: Float::with_val(p, &tau.im * self.a),
        };
        num.div(&self.jfactor(tau)?)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for GroupElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Argument(format!("group element '{s}' must be \"a,b,c,d\"")));
        }
        let mut v = [0i64; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| Error::Argument(format!("bad integer '{p}' in '{s}'")))?;
        }
        GroupElement::new(v[0], v[1], v[2], v[3])
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cusp {
    Infinity,
    Finite(Rational),
}

impl Cusp {
    pub fn from_ratio(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Ok(Cusp::Infinity);
        }
        Ok(Cusp::Finite(Rational::from((p, q))))
    }

    pub fn rational(&self) -> Option<&Rational> {
        match self {
            Cusp::Finite(q) => Some(q),
            Cusp::Infinity => None,
        }
    }

    /// (p, q) in lowest terms with q > 0.
    pub fn parts(&self) -> Option<(Integer, Integer)> {
        self.rational().map(|r| (r.numer().clone(), r.denom().clone()))
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cusp::Infinity => write!(f, "inf"),
            Cusp::Finite(q) => {
                if *q.denom() == 1 {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}

impl FromStr for Cusp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(Cusp::Infinity);
        }
        let q: Rational = t.parse().map_err(|_| Error::Argument(format!("cusp '{s}' must be p/q or inf")))?;
        Ok(Cusp::Finite(q))
    }
}

pub type ComplexFn = Arc<dyn Fn(&HPComplex) -> Result<HPComplex> + Send + Sync>;

/// Diagonal slash F|γ(τ) = ∏χ_j(γ)⁻¹·j(γ,τ)^{Σ(k_j−2)}·F(γτ).
pub fn slash(f: &ComplexFn, weights: &[Weight], multipliers: &[Option<HPComplex>], g: &GroupElement) -> Result<ComplexFn> {
    if weights.len() != multipliers.len() {
        return Err(Error::Argument("slash: one multiplier per weight is required".into()));
    }
    let mut chi: Option<HPComplex> = None;
    for (k, m) in multipliers.iter().enumerate() {
        let m = m.as_ref().ok_or_else(|| Error::MissingMultiplier(format!("{g} (weight #{k})")))?;
        chi = Some(match chi {
            None => m.clone(),
            Some(c) => &c * m,
        });
    }
    let chi_inv = match chi {
        Some(c) => Some(c.recip()?),
        None => None,
    };
    let twice_exp: i64 = weights.iter().map(|w| w.minus_two().0).sum();
    let f = f.clone();
    let g = *g;
    Ok(Arc::new(move |tau: &HPComplex| {
        let j = g.jfactor(tau)?;
        let mut v = &cpow_half(&j, twice_exp)? * &f(&g.act(tau)?)?;
        if let Some(c) = &chi_inv {
            v = &v * c;
        }
        Ok(v)
    }))
}

/// Seeded product of at most `max_len` letters from {T, T⁻¹, V, V⁻¹}, V = [[1,0],[N,1]].
/// Letters never cancel their predecessor.
pub fn random_word(n: i64, max_len: usize, seed: u64) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.gen_range(1..=max_len.max(1));
    let letters = [GroupElement::t(), GroupElement::t().inv(), GroupElement::v(n), GroupElement::v(n).inv()];
    let mut g = GroupElement::identity();
    let mut prev: Option<usize> = None;
    for _ in 0..len {
        let mut k = rng.gen_range(0..4usize);
        while prev == Some(k ^ 1) {
            k = rng.gen_range(0..4usize);
        }
        g = g.mul(&letters[k]);
        prev = Some(k);
    }
    g
}

/// Deterministic list of (γ₁, γ₂) pairs for a batch run.
pub fn random_pairs(n: i64, max_len: usize, seed: u64, count: usize) -> Vec<(GroupElement, GroupElement)> {
    (0..count as u64)
        .map(|i| {
            let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * i);
            (random_word(n, max_len, s), random_word(n, max_len, s + 1))
        })
        .collect()
}

/// Seeded Γ₀(N) words whose bottom-left entry is nonzero.
pub fn random_nontrivial(n: i64, max_len: usize, seed: u64, count: usize) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity(count);
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    while out.len() < count {
        let g = random_word(n, max_len, s);
        s = s.wrapping_add(1);
        if g.c != 0 && !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BITS: u32 = 160;

    #[test]
    fn products() {
        let g = GroupElement::new(5, 1, 4, 1).unwrap();
        assert_eq!(GroupElement::t().mul(&GroupElement::v(4)), g);
        assert_eq!(g.mul(&GroupElement::identity()), g);
        assert!(g.mul(&g.inv()).is_identity());
        assert!(GroupElement::new(1, 1, 1, 1).is_err());
    }

    #[test]
    fn cusp_images() {
        assert_eq!(GroupElement::identity().cusp_image(), Cusp::Infinity);
        assert_eq!(GroupElement::v(3).cusp_image().to_string(), "-1/3");
        assert_eq!(GroupElement::s().cusp_image().to_string(), "0");
    }

    #[test]
    fn jfactor_examples() {
        let tau = HPComplex::from_f64(0.3, 0.7, BITS);
        assert_eq!(GroupElement::identity().jfactor(&tau).unwrap(), HPComplex::one(BITS));
        assert_eq!(GroupElement::t().jfactor(&tau).unwrap(), HPComplex::one(BITS));
        let i = HPComplex::i(BITS);
        assert_eq!(GroupElement::s().jfactor(&i).unwrap(), i);
        let pole = HPComplex::from_f64(-1.0 / 4.0, 0.0, BITS);
        assert!(GroupElement::v(4).jfactor(&pole).is_err());
    }

    #[test]
    fn parse_roundtrip() {
        let g: GroupElement = "5,1,4,1".parse().unwrap();
        assert_eq!(g.to_string(), "5,1,4,1");
        assert!("1,2,3".parse::<GroupElement>().is_err());
        assert!("1,2,3,4".parse::<GroupElement>().is_err());
        let c: Cusp = "-2/6".parse().unwrap();
        assert_eq!(c.to_string(), "-1/3");
        assert_eq!("inf".parse::<Cusp>().unwrap(), Cusp::Infinity);
    }

    #[test]
    fn random_word_examples() {
        let g = random_word(4, 6, 11);
        assert_eq!(g, random_word(4, 6, 11));
        // find a seed whose single letter is T
        let t = (0..100).map(|s| random_word(5, 1, s)).find(|g| *g == GroupElement::t());
        assert_eq!(t, Some(GroupElement::t()));
    }

    #[test]
    fn slash_identity_and_weight_two() {
        let f: ComplexFn = Arc::new(|z: &HPComplex| Ok(z * z));
        let tau = HPComplex::from_f64(0.2, -0.9, BITS);
        let id = slash(&f, &[Weight::integral(12)], &[Some(HPComplex::one(BITS))], &GroupElement::identity()).unwrap();
        assert_eq!(id(&tau).unwrap(), f(&tau).unwrap());
        let one: ComplexFn = Arc::new(|z: &HPComplex| Ok(HPComplex::one(z.prec())));
        let g = GroupElement::new(2, 1, 5, 3).unwrap();
        let h = slash(&one, &[Weight::integral(2)], &[Some(HPComplex::one(BITS))], &g).unwrap();
        assert_eq!(h(&tau).unwrap(), HPComplex::one(BITS));
        assert!(matches!(slash(&one, &[Weight(3)], &[None], &g), Err(Error::MissingMultiplier(_))));
    }

    #[test]
    fn slash_is_right_action() {
        let f: ComplexFn = Arc::new(|z: &HPComplex| Ok((z * z).exp()));
        let one = [Some(HPComplex::one(BITS))];
        for seed in 0..5u64 {
            let g1 = random_word(4, 4, seed);
            let g2 = random_word(4, 4, seed + 100);
            let tau = HPComplex::from_f64(-0.3 + 0.1 * seed as f64, -0.5 - 0.2 * seed as f64, BITS);
            let wi = [Weight::integral(5)];
            let lhs = slash(&slash(&f, &wi, &one, &g1).unwrap(), &wi, &one, &g2).unwrap()(&tau).unwrap();
            let rhs = slash(&f, &wi, &one, &g1.mul(&g2)).unwrap()(&tau).unwrap();
            assert!((&lhs - &rhs).abs_f64() <= 1e-40 * (1.0 + rhs.abs_f64()));
        }
    }

    fn gamma0() -> impl Strategy<Value = (GroupElement, GroupElement, i64)> {
        (1i64..9, 1usize..7, any::<u64>(), any::<u64>())
            .prop_map(|(n, l, s1, s2)| (random_word(n, l, s1), random_word(n, l, s2), n))
    }

    proptest! {
        #[test]
        fn words_lie_in_gamma0((g1, g2, n) in gamma0()) {
            for g in [g1, g2] {
                prop_assert!(g.is_in_gamma0(n));
                prop_assert_eq!(g.a as i128 * g.d as i128 - g.b as i128 * g.c as i128, 1);
                prop_assert!(g.max_entry() <= (n + 1).pow(6));
            }
        }

        #[test]
        fn cusp_image_of_product((g1, g2, _n) in gamma0()) {
            let g = g1.mul(&g2);
            prop_assert_eq!(g.cusp_image(), g.inv().act_cusp(&Cusp::Infinity));
        }

        #[test]
        fn jfactor_cocycle_exact((g1, g2, _n) in gamma0(), p in -50i64..50, q in 1i64..50) {
            // j(γ₁γ₂, x) = j(γ₁, γ₂x)·j(γ₂, x) on rationals avoiding poles
            let x = Rational::from((p, q));
            let j = |g: &GroupElement, x: &Rational| Rational::from(x * g.c) + g.d;
            prop_assume!(j(&g2, &x) != 0 && j(&g1.mul(&g2), &x) != 0);
            let g2x = g2.act_rational(&x).unwrap();
            let lhs = j(&g1.mul(&g2), &x);
            let rhs = j(&g1, &g2x) * j(&g2, &x);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
