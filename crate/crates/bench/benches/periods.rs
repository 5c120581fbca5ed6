use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use periodlab::cocycle::{depth_cocycle_residual, Ctx, Mode, Periods};
use periodlab::eichler::eichler_i;
use periodlab::iterated::{lambda_completed, period_polynomial, Options};
use periodlab::{quad_nodes, Cusp, PrecisionBudget};
use periodlab_bench::{delta, engine, tau, theta, word};

fn quadrature(c: &mut Criterion) {
    c.bench_function("tanh-sinh nodes, level 5, 160 bits", |b| b.iter(|| quad_nodes(black_box(5), 160)));
}

fn forms(c: &mut Criterion) {
    let bits = engine(30).bits();
    let (d, th, t) = (delta(bits), theta(bits), tau(bits).conj());
    c.bench_function("delta at one point, 30 digits", |b| b.iter(|| d.eval_point(black_box(&t), bits).unwrap()));
    c.bench_function("theta at one point, 30 digits", |b| b.iter(|| th.eval_point(black_box(&t), bits).unwrap()));
}

fn integrals(c: &mut Criterion) {
    let mut g = c.benchmark_group("integrals");
    g.sample_size(10);
    let o = Options::default();
    g.bench_function("lambda depth 1, 30 digits", |b| {
        b.iter(|| {
            let e = engine(30);
            let d = delta(e.bits());
            lambda_completed(&e, &[d], &Cusp::from_ratio(1, 3).unwrap(), &[6], &o).unwrap()
        })
    });
    g.bench_function("period polynomial depth 1, 30 digits", |b| {
        b.iter(|| {
            let e = engine(30);
            let d = delta(e.bits());
            period_polynomial(&e, &[d], &word(), &o).unwrap()
        })
    });
    g.bench_function("eichler integral of delta, 30 digits", |b| {
        b.iter(|| {
            let e = engine(30);
            let d = delta(e.bits());
            eichler_i(&e, &d, &tau(e.bits()), &o).unwrap()
        })
    });
    g.bench_function("depth-2 cocycle relation, 20 digits", |b| {
        b.iter(|| {
            let budget = PrecisionBudget::new(20).unwrap();
            let e = Arc::new(engine(20));
            let d = delta(e.bits());
            let p = Periods::new(e, Mode::Polynomial, o);
            let ctx = Ctx::new(budget);
            let g1 = word();
            depth_cocycle_residual(&p, &ctx, &[d.clone(), d], &g1, &g1.inv().mul(&periodlab::GroupElement::t()), 1e-9, 0.0).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, quadrature, forms, integrals);
criterion_main!(benches);
