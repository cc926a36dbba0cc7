mod common;

use std::f64::consts::PI;

use common::*;
use fermat::{Error, FInterval, FermatReal, QsFunction, QuadratureConfig};
use proptest::prelude::*;

fn r(x: f64) -> FermatReal {
    FermatReal::real(x)
}

fn dt(n: i64) -> FermatReal {
    FermatReal::dt_q(n, 1)
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn with_p(text: &str, p: FermatReal) -> QsFunction {
    QsFunction::parse(text, "x", &[("p", p)], FInterval::real_line()).unwrap()
}

#[test]
fn evaluation() {
    let f = with_p("p*x^2", r(1.0) + dt(1));
    assert_eq!(f.eval(&r(2.0)).unwrap(), r(4.0) + dt(1).scale(4.0));
    let s = QsFunction::extension("sin(x)", "x").unwrap();
    assert!(s.eval(&r(PI)).unwrap().std().abs() < 1e-15);

    let dom = FInterval::closed(r(0.0), r(1.0)).unwrap();
    let g = QsFunction::parse("x", "x", &[], dom).unwrap();
    assert!(matches!(g.eval(&r(2.0)), Err(Error::OutOfDomain(_))));
    // 1 + dt lies above every point of [0, 1]
    assert!(matches!(g.eval(&(r(1.0) + dt(1))), Err(Error::OutOfDomain(_))));
    assert!(g.eval(&(r(1.0) - dt(1))).is_ok());
}

#[test]
fn derivatives() {
    let f = QsFunction::extension("x^2", "x").unwrap();
    assert_eq!(f.derivative(&(r(3.0) + dt(1))).unwrap(), r(6.0) + dt(1).scale(2.0));
    let s = QsFunction::extension("sin(x)", "x").unwrap();
    assert_eq!(s.derivative(&r(0.0)).unwrap(), r(1.0));
    let e = with_p("exp(p*x)", r(2.0));
    let got = e.derivative(&dt(2)).unwrap();
    fermat_close(&got, &(r(2.0) + dt(2).scale(4.0) + dt(1).scale(4.0)), 1e-14).unwrap();
}

#[test]
fn incremental_ratios() {
    let f = QsFunction::extension("x^2", "x").unwrap();
    let ratio = f.incremental_ratio(&r(3.0), &dt(1), &cfg()).unwrap();
    fermat_close(&ratio, &(r(6.0) + dt(1)), 1e-12).unwrap();
    assert_eq!(f.incremental_ratio(&r(3.0), &FermatReal::zero(), &cfg()).unwrap(), r(6.0));

    // The smooth ratio of exp at 0 carries a dt/6 term; it is annihilated by
    // h = dt_2, so h·r agrees with h·(1 + dt_2/2).
    let e = QsFunction::extension("exp(x)", "x").unwrap();
    let ratio = e.incremental_ratio(&r(0.0), &dt(2), &cfg()).unwrap();
    fermat_close(&ratio, &(r(1.0) + dt(2).scale(0.5) + dt(1).scale(1.0 / 6.0)), 1e-10).unwrap();
    let h = dt(2);
    fermat_close(&(&h * &ratio), &(&h * &(r(1.0) + dt(2).scale(0.5))), 1e-10).unwrap();
    let moved = e.eval(&h).unwrap();
    fermat_close(&moved, &(r(1.0) + &h * &ratio), 1e-10).unwrap();
}

#[test]
fn shadow_and_infinitesimal_part() {
    let f = with_p("p*x", r(1.0) + dt(1));
    let sh = f.shadow();
    assert_eq!(sh.params()[0].1, r(1.0));
    let inf = f.inf_part();
    fermat_close(&inf.eval(&r(2.0)).unwrap(), &dt(1).scale(2.0), 1e-15).unwrap();
    // δf(x) = δ(f(x)) at a standard point
    let fx = f.eval(&r(1.0)).unwrap();
    fermat_close(&inf.eval(&r(1.0)).unwrap(), &fx.infinitesimal_part(), 1e-15).unwrap();
    assert_eq!(f.std_part().eval(2.0).unwrap(), 2.0);

    let real = with_p("sin(p*x)", r(0.3));
    assert!(real.inf_part().eval(&(r(0.7) + dt(2))).unwrap().is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shadow_plus_infinitesimal_part_is_f(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let p = random_fermat(&mut rng, -1.0..1.0, 2);
        let alpha = random_expr_in(&mut rng, "x", &["p"], 3);
        let f = QsFunction::new(alpha, "x", vec![("p".into(), p)], FInterval::real_line()).unwrap();
        let x = random_fermat(&mut rng, -1.0..1.0, 2);
        let whole = f.eval(&x).unwrap();
        let split = f.shadow().eval(&x).unwrap() + f.inf_part().eval(&x).unwrap();
        prop_assert!(fermat_close(&whole, &split, 1e-10).is_ok());
        // values of δf are infinitesimal
        prop_assert!(f.inf_part().eval(&x).unwrap().std().abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_forward_mode(seed in any::<u64>(), x in -1.5..1.5f64) {
        let mut rng = rng(seed);
        let alpha = random_expr_in(&mut rng, "x", &[], 3);
        let f = QsFunction::new(alpha.clone(), "x", vec![], FInterval::real_line()).unwrap();
        let d = f.derivative(&r(x)).unwrap();
        prop_assert!(close(d.std(), partial(&alpha, "x", &[("x", x)]), 1e-11));
    }
}
