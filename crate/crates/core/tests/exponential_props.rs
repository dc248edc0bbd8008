mod common;

use common::*;
use proptest::prelude::*;
use tscalc::exponentials::{delta_exp_function, nabla_exp_function};
use tscalc::{
    combined_E, combined_e, delta_derivative, delta_exp, delta_to_nabla_param, diamond_derivative,
    diamond_derivative_of_delta_exp, diamond_derivative_of_nabla_exp, nabla_derivative, nabla_exp,
    nabla_to_delta_param, rho_shift_delta_exp, rho_shift_nabla_exp, Alpha, Point, TimeScale, TsFunction,
};

/// `p(t) = c0 + c1 sin(t)`, small enough to keep every factor positive on
/// the windows sampled below.
fn coefficient(c0: f64, c1: f64) -> TsFunction {
    TsFunction::new(move |t| c0 + c1 * t.sin()).with_derivative(move |t| c1 * t.cos())
}

fn scales() -> Vec<TimeScale> {
    vec![
        TimeScale::integers(),
        TimeScale::uniform(0.5),
        TimeScale::uniform(2.0),
        TimeScale::geometric(2.0).unwrap(),
        TimeScale::q_symmetric(2.0).unwrap(),
        halfline_geometric(),
    ]
}

/// A scattered sample point selected by `k`; geometric grids stay within
/// `[2^-6, 4]` so that `ν p` remains well below 1.
fn scattered(ts: &TimeScale, k: i64) -> Point {
    let seg = ts.segments().len() - 1;
    match ts.segments()[seg] {
        tscalc::Segment::Uniform { .. } => ts.index_point(seg, k.clamp(-10, 10)).unwrap(),
        _ => ts.index_point(seg, k.clamp(-6, 2)).unwrap(),
    }
}

/// Any sample point: scattered, or dense on the mixed scale.
fn sample(ts: &TimeScale, k: i64, x: f64, dense: bool) -> Point {
    if dense && ts.segments()[0].is_dense() {
        ts.point(x).unwrap()
    } else if dense && ts.segments().len() == 2 && k % 2 == 0 {
        ts.index_point(0, k.clamp(-6, 2)).unwrap()
    } else {
        scattered(ts, k)
    }
}

fn params() -> impl Strategy<Value = (f64, f64)> {
    (-0.1f64..0.2, -0.05f64..0.05)
}

proptest! {
    #[test]
    fn exponentials_solve_their_ivps((c0, c1) in params(), which in 0usize..6, k in -10i64..10, k0 in -10i64..10) {
        let ts = &scales()[which];
        let p = coefficient(c0, c1);
        let (t, t0) = (scattered(ts, k), scattered(ts, k0));
        let e = delta_exp_function(&p, ts, &t0);
        let d = delta_derivative(&e, ts, &t).unwrap();
        prop_assert!(close(d, p.eval(&t) * e.eval(&t), 1e-10));
        let eh = nabla_exp_function(&p, ts, &t0);
        let d = nabla_derivative(&eh, ts, &t).unwrap();
        prop_assert!(close(d, p.eval(&t) * eh.eval(&t), 1e-10));
    }

    #[test]
    fn semigroup_law(
        (c0, c1) in params(),
        which in 0usize..6,
        ks in prop::array::uniform3(-10i64..10),
        xs in prop::array::uniform3(-0.99f64..-0.01),
        dense in prop::array::uniform3(any::<bool>()),
        alpha in 0.0f64..1.0,
    ) {
        let ts = &scales()[which];
        let p = coefficient(c0, c1);
        let pts: Vec<Point> = (0..3).map(|i| sample(ts, ks[i], xs[i], dense[i])).collect();
        let (t, s, t0) = (&pts[0], &pts[1], &pts[2]);
        let e = |a: &Point, b: &Point| delta_exp(&p, ts, a, b).unwrap().value;
        prop_assert!(close(e(t, s) * e(s, t0), e(t, t0), 1e-10));
        let eh = |a: &Point, b: &Point| nabla_exp(&p, ts, a, b).unwrap().value;
        prop_assert!(close(eh(t, s) * eh(s, t0), eh(t, t0), 1e-10));
        let a = Alpha::new(alpha).unwrap();
        let ce = |x: &Point, y: &Point| combined_e(a, &p, ts, x, y).unwrap();
        prop_assert!(close(ce(t, s) * ce(s, t0), ce(t, t0), 1e-10));
    }

    #[test]
    fn combined_e_is_log_linear((c0, c1) in params(), which in 0usize..6, k in -10i64..10, k0 in -10i64..10, alpha in 0.0f64..1.0) {
        let ts = &scales()[which];
        let p = coefficient(c0, c1);
        let (t, t0) = (scattered(ts, k), scattered(ts, k0));
        let a = Alpha::new(alpha).unwrap();
        let lhs = combined_e(a, &p, ts, &t, &t0).unwrap().ln();
        let rhs = alpha * delta_exp(&p, ts, &t, &t0).unwrap().value.ln()
            + (1.0 - alpha) * nabla_exp(&p, ts, &t, &t0).unwrap().value.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn conversion_equivalence(
        (c0, c1) in params(),
        which in 0usize..6,
        k in -10i64..10,
        k0 in -10i64..10,
        x in -0.99f64..-0.01,
        dense in any::<bool>(),
    ) {
        let ts = &scales()[which];
        let p = coefficient(c0, c1);
        let (t, t0) = (sample(ts, k, x, dense), scattered(ts, k0));
        let q = delta_to_nabla_param(&p, ts);
        prop_assert!(close(nabla_exp(&q, ts, &t, &t0).unwrap().value, delta_exp(&p, ts, &t, &t0).unwrap().value, 1e-10));
        let back = nabla_to_delta_param(&p, ts);
        prop_assert!(close(delta_exp(&back, ts, &t, &t0).unwrap().value, nabla_exp(&p, ts, &t, &t0).unwrap().value, 1e-10));
    }

    #[test]
    fn rho_shift_identities((c0, c1) in params(), which in 0usize..6, k in -10i64..10, k0 in -10i64..10) {
        let ts = &scales()[which];
        let p = coefficient(c0, c1);
        let (t, t0) = (scattered(ts, k), scattered(ts, k0));
        let rho = ts.rho(&t);
        prop_assert!(close(rho_shift_delta_exp(&p, ts, &t, &t0).unwrap(), delta_exp(&p, ts, &rho, &t0).unwrap().value, 1e-12));
        prop_assert!(close(rho_shift_nabla_exp(&p, ts, &t, &t0).unwrap(), nabla_exp(&p, ts, &rho, &t0).unwrap().value, 1e-12));
    }

    #[test]
    fn diamond_derivative_closed_forms((c0, c1) in params(), which in 0usize..6, k in -10i64..10, k0 in -10i64..10, alpha in 0.0f64..1.0) {
        let ts = &scales()[which];
        let p = coefficient(c0, c1);
        let (t, t0) = (scattered(ts, k), scattered(ts, k0));
        let a = Alpha::new(alpha).unwrap();
        let direct = diamond_derivative(&delta_exp_function(&p, ts, &t0), ts, &t, a).unwrap();
        prop_assert!(close(diamond_derivative_of_delta_exp(&p, ts, &t, &t0, a).unwrap(), direct, 1e-10));
        let direct = diamond_derivative(&nabla_exp_function(&p, ts, &t0), ts, &t, a).unwrap();
        prop_assert!(close(diamond_derivative_of_nabla_exp(&p, ts, &t, &t0, a).unwrap(), direct, 1e-10));
    }
}

#[test]
fn integer_products_match_direct_loops() {
    let z = TimeScale::integers();
    let p = coefficient(0.3, 0.1);
    let t0 = at(&z, -3.0);
    let (mut e, mut eh) = (1.0, 1.0);
    for k in -3..12 {
        let t = at(&z, k as f64);
        assert!(close(delta_exp(&p, &z, &t, &t0).unwrap().value, e, 1e-13));
        assert!(close(nabla_exp(&p, &z, &t, &t0).unwrap().value, eh, 1e-13));
        let pk = 0.3 + 0.1 * (k as f64).sin();
        let pk1 = 0.3 + 0.1 * ((k + 1) as f64).sin();
        e *= 1.0 + pk;
        eh /= 1.0 - pk1;
    }
}

#[test]
fn mixed_scale_exponential_matches_integral_and_tail() {
    // dense part contributes exp(0.4 * 1); the tail over (0, 2] contributes prod (1 + 0.4 * 2^k), k <= 0
    let ts = halfline_geometric();
    let p = TsFunction::constant(0.4);
    let v = delta_exp(&p, &ts, &at(&ts, 2.0), &at(&ts, -1.0)).unwrap().value;
    let mut oracle = 0.4f64.exp();
    for k in 0..80 {
        oracle *= 1.0 + 0.4 * 0.5f64.powi(k);
    }
    assert!(close(v, oracle, 1e-13));
}

#[test]
fn combined_exponentials_on_integers() {
    let z = TimeScale::integers();
    let p = TsFunction::constant(0.5);
    let t0 = at(&z, 0.0);
    for k in 0..=20 {
        let t = at(&z, k as f64);
        for alpha in [0.0, 0.25, 0.5, 1.0] {
            let v = combined_E(Alpha::new(alpha).unwrap(), &p, &z, &t, &t0).unwrap();
            assert!(close(v, alpha * 1.5f64.powi(k) + (1.0 - alpha) * 2f64.powi(k), 1e-12));
        }
    }
}

#[test]
fn conversion_across_scattered_to_dense_junction() {
    // -1 is a grid point (left-scattered) and also the left end of the interval
    let ts = TimeScale::new(vec![
        tscalc::Segment::uniform(1.0, -1.0, None, Some(0)).unwrap(),
        tscalc::Segment::interval(-1.0, 0.0).unwrap(),
        tscalc::Segment::geometric(2.0, tscalc::Orientation::Positive, None).unwrap(),
    ])
    .unwrap();
    let p = coefficient(0.15, 0.04);
    let t0 = at(&ts, -4.0);
    let q = delta_to_nabla_param(&p, &ts);
    let back = nabla_to_delta_param(&p, &ts);
    for x in [-1.0, -0.5, 0.0, 0.5, 4.0] {
        let t = at(&ts, x);
        let e = delta_exp(&p, &ts, &t, &t0).unwrap().value;
        assert!(close(nabla_exp(&q, &ts, &t, &t0).unwrap().value, e, 1e-12), "t = {x}");
        let eh = nabla_exp(&p, &ts, &t, &t0).unwrap().value;
        assert!(close(delta_exp(&back, &ts, &t, &t0).unwrap().value, eh, 1e-12), "t = {x}");
    }
}
