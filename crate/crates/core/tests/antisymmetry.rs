use std::sync::Arc;

use periodlab::cocycle::{antisymmetry_residual, Ctx, Mode, Periods};
use periodlab::group::random_nontrivial;
use periodlab::iterated::Options;
use periodlab::{Engine, Form, FormRef, PrecisionBudget};

fn setup(digits: u32, mode: Mode) -> (Arc<Periods>, Arc<Ctx>) {
    let b = PrecisionBudget::new(digits).unwrap();
    let e = Arc::new(Engine::new(b.clone()));
    (Periods::new(e, mode, Options::default()), Arc::new(Ctx::new(b)))
}

#[test]
fn delta_periods_are_antisymmetric() {
    let (p, c) = setup(25, Mode::Polynomial);
    let d: FormRef = Arc::new(Form::delta(c.bits()).unwrap());
    let r = p.cochain(&[d]);
    for g in random_nontrivial(1, 5, 3, 4) {
        let rep = antisymmetry_residual(&c, &r, &g, 1e-18, Default::default()).unwrap();
        assert!(rep.pass, "{g}: {:e}", rep.residual);
    }
}

#[test]
fn theta_periods_are_antisymmetric() {
    let (p, c) = setup(20, Mode::Samples);
    let th: FormRef = Arc::new(Form::theta(1, 2, c.bits()).unwrap());
    let r = p.cochain(&[th]);
    for g in random_nontrivial(8, 2, 5, 2) {
        let rep = antisymmetry_residual(&c, &r, &g, 1e-10, Default::default()).unwrap();
        assert!(rep.pass, "{g}: {:e}", rep.residual);
        assert_eq!(rep.taus.len(), 7);
    }
}
