use std::sync::Arc;

use rug::{Float, Integer, Rational};

use super::*;
use crate::forms::Form;
use crate::group::{random_word, Cusp, GroupElement, Weight};
use crate::hp::{pi, PrecisionBudget};

fn delta(bits: u32) -> FormRef {
    Arc::new(Form::delta(bits).unwrap())
}

fn engine(digits: u32) -> Engine {
    Engine::new(PrecisionBudget::new(digits).unwrap())
}

fn zero_cusp() -> Cusp {
    Cusp::Finite(Rational::new())
}

// τ(n) for n < len from η^24 with η through the pentagonal theorem.
fn tau_oracle(len: usize) -> Vec<Integer> {
    let mut pent = Vec::new();
    let mut k: i64 = 1;
    pent.push((0usize, 1i32));
    loop {
        let mut any = false;
        for e in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
            if (e as usize) < len {
                pent.push((e as usize, if k % 2 == 0 { 1 } else { -1 }));
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    pent.sort();
    let mut acc = vec![Integer::new(); len];
    acc[0] = Integer::from(1);
    for _ in 0..24 {
        let mut next = vec![Integer::new(); len];
        for (i, a) in acc.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for &(e, s) in &pent {
                if i + e >= len {
                    break;
                }
                if s > 0 {
                    next[i + e] += a;
                } else {
                    next[i + e] -= a;
                }
            }
        }
        acc = next;
    }
    // Δ = q·η^24 shifted: τ(n) = acc[n−1]
    let mut out = vec![Integer::new(); len];
    out[1..len].clone_from_slice(&acc[..(len - 1)]);
    out
}

fn gamma_over_2pi(s: &[i64], bits: u32) -> HPComplex {
    gamma_factor(s, bits).unwrap()
}

#[test]
fn zero_form_vanishes_everywhere() {
    let e = engine(20);
    let bits = e.bits();
    let z: FormRef = Arc::new(Form::zero(bits));
    let d = delta(bits);
    let o = Options::default();
    assert!(lambda_completed(&e, &[z.clone()], &zero_cusp(), &[3], &o).unwrap().value.is_zero());
    assert!(lambda_completed(&e, &[d.clone(), z.clone()], &zero_cusp(), &[3, 2], &o).unwrap().value.is_zero());
    assert!(multiple_l_partial(&[d.clone(), z.clone()], &Rational::new(), &[15, 15], 50.0, bits).unwrap().value.is_zero());
    let taus = [HPComplex::from_f64(0.1, -0.7, bits)];
    let g = GroupElement::v(1);
    let r = rstar(&e, &[z.clone()], &[Weight::integral(10)], &g, &taus, &o).unwrap();
    assert!(r.value[0].is_zero());
    let rep = mellin_identity_residual(&e, &[z], &Rational::new(), &[15], 1e-10, 0.0, &o).unwrap();
    assert_eq!(rep.residual, 0.0);
    assert!(rep.pass);
}

#[test]
fn identity_and_infinity_give_zero() {
    let e = engine(20);
    let bits = e.bits();
    let d = delta(bits);
    let o = Options::default();
    let taus = [HPComplex::from_f64(0.1, -0.7, bits)];
    let r = rstar(&e, &[d.clone()], &[Weight::integral(10)], &GroupElement::identity(), &taus, &o).unwrap();
    assert!(r.value[0].is_zero());
    let p = period_polynomial(&e, &[d.clone(), d.clone()], &GroupElement::t(), &o).unwrap();
    assert_eq!(p.coeffs.len(), 21);
    assert!(p.coeffs.iter().all(|c| c.is_zero()));
    assert!(lambda_completed(&e, &[d], &Cusp::Infinity, &[2], &o).unwrap().value.is_zero());
}

#[test]
fn depth_one_lambda_matches_series() {
    let e = engine(30);
    let bits = e.bits();
    let d = delta(bits);
    let lam = lambda_completed(&e, &[d], &zero_cusp(), &[15], &Options::default()).unwrap();
    let tau = tau_oracle(3000);
    let mut l = Float::with_val(bits, 0);
    for (n, c) in tau.iter().enumerate().skip(1) {
        let term = Float::with_val(bits, c) / Float::with_val(bits, rug::ops::Pow::pow(Integer::from(n), 15u32));
        l += term;
    }
    let want = &gamma_over_2pi(&[15], bits) * &HPComplex::from_real(l);
    let rel = (&lam.value - &want).abs_f64() / want.abs_f64();
    assert!(rel < 1e-26, "relative difference {rel:e}");
    assert!(lam.err < 1e-30 * want.abs_f64());
}

#[test]
fn depth_two_lambda_matches_double_series() {
    let e = engine(20);
    let bits = e.bits();
    let d = delta(bits);
    let a = Rational::from((1, 3));
    let lam = lambda_completed(&e, &[d.clone(), d], &Cusp::Finite(a.clone()), &[15, 15], &Options::default()).unwrap();
    let tau = tau_oracle(400);
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let mut l = HPComplex::zero(bits);
    for n1 in 1..400usize {
        for n2 in 1..400usize {
            let num = Float::with_val(bits, Integer::from(&tau[n1] * &tau[n2]));
            let den = Float::with_val(bits, rug::ops::Pow::pow(Integer::from(n1 + n2), 15u32))
                * Float::with_val(bits, rug::ops::Pow::pow(Integer::from(n2), 15u32));
            let ang = Float::with_val(bits, &two_pi * ((n1 + n2) % 3) as u32) / 3u32;
            l += &HPComplex::cis(&ang).mul_real(&Float::with_val(bits, num / den));
        }
    }
    let want = &gamma_over_2pi(&[15, 15], bits) * &l;
    let rel = (&lam.value - &want).abs_f64() / want.abs_f64();
    assert!(rel < 1e-15, "relative difference {rel:e}");
}

#[test]
fn mellin_residual_depth_one() {
    let e = engine(30);
    let d = delta(e.bits());
    let rep = mellin_identity_residual(&e, &[d.clone()], &Rational::new(), &[15], 1e-25, 0.0, &Options::default()).unwrap();
    assert!(rep.pass, "residual {:e}", rep.residual);
    let bad = mellin_identity_residual(&e, &[d], &Rational::new(), &[15], 1e-25, 1e-6, &Options::default()).unwrap();
    assert!(!bad.pass);
}

#[test]
fn partial_sum_stable_under_doubling() {
    let bits = PrecisionBudget::new(30).unwrap().bits();
    let d = delta(bits);
    let a = Rational::new();
    let x = multiple_l_partial(&[d.clone()], &a, &[15], 4096.0, bits).unwrap();
    let y = multiple_l_partial(&[d], &a, &[15], 8192.0, bits).unwrap();
    let diff = (&x.value - &y.value).abs_f64();
    assert!(diff <= 1e-27, "diff {diff:e}");
    assert!(diff <= x.tail);
    assert!(y.tail < x.tail);
}

#[test]
fn partial_sum_symmetric_in_identical_labels() {
    let bits = PrecisionBudget::new(20).unwrap().bits();
    let d1 = delta(bits);
    let d2: FormRef = Arc::new(d1.scaled(&HPComplex::one(bits), "delta-copy"));
    let a = Rational::from((2, 5));
    let x = multiple_l_partial(&[d1.clone(), d2.clone()], &a, &[15, 15], 60.0, bits).unwrap();
    let y = multiple_l_partial(&[d2, d1], &a, &[15, 15], 60.0, bits).unwrap();
    assert_eq!(x.value, y.value);
}

#[test]
fn partial_sum_rejects_divergent_exponents() {
    let bits = PrecisionBudget::new(20).unwrap().bits();
    let d = delta(bits);
    match multiple_l_partial(&[d], &Rational::new(), &[7], 100.0, bits) {
        Err(Error::Divergent(_)) => {}
        other => panic!("expected divergence error, got {other:?}"),
    }
}

fn sample_taus(bits: u32) -> Vec<HPComplex> {
    (0..5).map(|k| HPComplex::from_f64(0.35 * k as f64 - 0.7, -0.45 - 0.15 * k as f64, bits)).collect()
}

#[test]
fn route_equivalence_depth_one() {
    let e = engine(30);
    let bits = e.bits();
    let d = delta(bits);
    let o = Options::default();
    for seed in 0..2 {
        let g = loop {
            let g = random_word(1, 4, seed * 17 + 3);
            if g.c != 0 {
                break g;
            }
        };
        let p = period_polynomial(&e, &[d.clone()], &g, &o).unwrap();
        assert_eq!(p.degree_bound(), 10);
        let taus = sample_taus(bits);
        let r = rstar(&e, &[d.clone()], &[Weight::integral(10)], &g, &taus, &o).unwrap();
        for (t, v) in taus.iter().zip(&r.value) {
            let x = p.eval(t);
            assert!((&x - v).abs_f64() <= 1e-26 * x.abs_f64().max(1.0), "{g} at {:?}", t.to_f64_pair());
        }
    }
}

#[test]
fn route_equivalence_depth_two() {
    let e = engine(20);
    let bits = e.bits();
    let d = delta(bits);
    let o = Options::default();
    let g = GroupElement::new(1, 0, 1, 1).unwrap();
    let p = period_polynomial(&e, &[d.clone(), d.clone()], &g, &o).unwrap();
    assert_eq!(p.degree_bound(), 20);
    let taus = sample_taus(bits);
    let w = Weight::integral(10);
    let r = rstar(&e, &[d.clone(), d], &[w, w], &g, &taus, &o).unwrap();
    for (t, v) in taus.iter().zip(&r.value) {
        let x = p.eval(t);
        assert!((&x - v).abs_f64() <= 1e-16 * x.abs_f64().max(1.0), "{:?}", t.to_f64_pair());
    }
}

#[test]
fn tau_coefficients_agree_with_centered_form() {
    let e = engine(20);
    let d = delta(e.bits());
    let g = GroupElement::new(1, 0, 3, 1).unwrap();
    let p = period_polynomial(&e, &[d], &g, &Options::default()).unwrap();
    let c = p.tau_coeffs();
    let t = HPComplex::from_f64(0.3, -0.8, e.bits());
    let mut direct = HPComplex::zero(e.bits());
    for x in c.iter().rev() {
        direct = &(&direct * &t) + x;
    }
    let centered = p.eval(&t);
    assert!((&direct - &centered).abs_f64() <= 1e-20 * centered.abs_f64());
}

#[test]
fn homogeneity_in_each_form() {
    let e = engine(20);
    let bits = e.bits();
    let d = delta(bits);
    let o = Options::default();
    let a = Cusp::Finite(Rational::from((-1, 2)));
    let base = lambda_completed(&e, &[d.clone(), d.clone()], &a, &[3, 2], &o).unwrap().value;
    let taus = sample_taus(bits);
    let w = Weight::integral(10);
    let g = GroupElement::v(2);
    let r0 = rstar(&e, &[d.clone()], &[w], &g, &taus, &o).unwrap();
    for lambda in [3.0, -0.5] {
        let l = HPComplex::from_f64(lambda, 0.0, bits);
        let ds: FormRef = Arc::new(d.scaled(&l, &format!("delta*{lambda}")));
        let v = lambda_completed(&e, &[d.clone(), ds.clone()], &a, &[3, 2], &o).unwrap().value;
        let want = &base * &l;
        assert!((&v - &want).abs_f64() <= 1e-20 * want.abs_f64());
        let r = rstar(&e, &[ds.clone()], &[w], &g, &taus, &o).unwrap();
        for (x, y) in r.value.iter().zip(&r0.value) {
            let want = y * &l;
            assert!((x - &want).abs_f64() <= 1e-20 * want.abs_f64().max(1e-30));
        }
        let pl = multiple_l_partial(&[ds], &Rational::from((1, 4)), &[15], 64.0, bits).unwrap();
        let p0 = multiple_l_partial(&[d.clone()], &Rational::from((1, 4)), &[15], 64.0, bits).unwrap();
        let want = &p0.value * &l;
        assert!((&pl.value - &want).abs_f64() <= 1e-20 * want.abs_f64());
    }
}

#[test]
fn refinement_changes_less_than_reported_error() {
    let e = engine(20);
    let bits = e.bits();
    let d = delta(bits);
    let o = Options { allow_deep: false, max_refine: 0 };
    let w = Weight::integral(10);
    let g = GroupElement::new(1, 0, 1, 1).unwrap();
    let taus = [HPComplex::from_f64(0.0, -2.0, bits)];
    let a = rstar(&e, &[d.clone(), d.clone()], &[w, w], &g, &taus, &o).unwrap();
    let b = rstar(&e.refined(), &[d.clone(), d], &[w, w], &g, &taus, &o).unwrap();
    let diff = (&a.value[0] - &b.value[0]).abs_f64();
    assert!(diff <= a.err[0], "diff {diff:e} err {:e}", a.err[0]);
    assert!(a.err[0] <= 1e-20 * a.value[0].abs_f64());
}

#[test]
fn depth_one_phase_factors_out() {
    // f(iu) is real for real coefficients, so Λ(0; s)/i^s is real
    let e = engine(20);
    let bits = e.bits();
    let d = delta(bits);
    let t = lambda_table(&e, &[d], &zero_cusp(), &[11], &Options::default()).unwrap();
    let i = HPComplex::i(bits);
    for s in 1..=11usize {
        let v = t.get(&[s - 1]).div(&i.powi(s as i64).unwrap()).unwrap();
        assert!(v.im.to_f64().abs() <= 1e-25 * v.abs_f64(), "s = {s}");
        assert!(v.re.to_f64() > 0.0);
    }
}

#[test]
fn half_integral_kernels_need_lower_half_plane() {
    let e = engine(20);
    let bits = e.bits();
    let th: FormRef = Arc::new(Form::theta(1, 2, bits).unwrap());
    let g = GroupElement::v(8);
    let o = Options::default();
    let k = Weight(-1);
    let up = [HPComplex::from_f64(0.1, 0.5, bits)];
    assert!(matches!(rstar(&e, &[th.clone()], &[k], &g, &up, &o), Err(Error::PathConflict(_))));
    let near = [HPComplex::from_f64(-0.125, -0.0005, bits)];
    assert!(matches!(rstar(&e, &[th.clone()], &[k], &g, &near, &o), Err(Error::PathConflict(_))));
    let ok = [HPComplex::from_f64(-0.1, -0.9, bits)];
    let v = rstar(&e, &[th], &[k], &g, &ok, &o).unwrap();
    assert!(v.value[0].is_finite() && !v.value[0].is_zero());
}

#[test]
fn depth_cap_and_arguments() {
    let e = engine(20);
    let d = delta(e.bits());
    let four = vec![d.clone(); 4];
    let o = Options::default();
    assert!(matches!(lambda_completed(&e, &four, &zero_cusp(), &[1, 1, 1, 1], &o), Err(Error::Argument(_))));
    assert!(matches!(lambda_completed(&e, &[d.clone()], &zero_cusp(), &[0], &o), Err(Error::Argument(_))));
    assert!(matches!(lambda_completed(&e, &[d], &zero_cusp(), &[1, 2], &o), Err(Error::Argument(_))));
}

#[test]
fn lambda_json_schema() {
    let e = engine(20);
    let d = delta(e.bits());
    let v = lambda_completed(&e, &[d], &zero_cusp(), &[3], &Options::default()).unwrap();
    let j = v.to_json();
    for key in ["depth", "forms", "basepoint", "s", "value", "err", "digits"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert_eq!(j["basepoint"], "0");
    assert_eq!(j["depth"], 1);
    assert!(j["value"]["re"].is_string());
    assert_eq!(serde_json::to_string(&j).unwrap(), serde_json::to_string(&v.to_json()).unwrap());
}

#[test]
fn route_report_and_negative_control() {
    let e = engine(20);
    let bits = e.bits();
    let d = delta(bits);
    let o = Options::default();
    let g = GroupElement::new(1, 0, 2, 1).unwrap();
    let taus = sample_taus(bits);
    let rep = route_residual(&e, &[d.clone()], &g, &taus, 1e-15, 0.0, &o).unwrap();
    assert!(rep.pass && rep.lhs.len() == 5, "{:e}", rep.residual);
    let bad = route_residual(&e, &[d], &g, &taus, 1e-15, 1e-6, &o).unwrap();
    assert!(!bad.pass);
}
