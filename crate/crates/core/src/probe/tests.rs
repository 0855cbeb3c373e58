use proptest::prelude::*;

use super::*;
use crate::space::NormKind;

const E: NormKind = NormKind::Euclidean;

fn v(xs: &[f64]) -> Vector {
    Vector::from_f64(xs)
}

fn line() -> Domain {
    Domain::new_box(v(&[-1.0]), v(&[1.0]), E).unwrap()
}

fn slope(c: f64) -> LinearMap {
    LinearMap::from_rows(&[&[c]], E, E).unwrap()
}

fn abs() -> LipFun {
    LipFun::norm_of(1, 1, E)
}

#[test]
fn dq_error_exact_cases() {
    let r = Real::from_f64(0.25);
    let d2 = Domain::unit_box(2, E);
    let a = LinearMap::from_rows(&[&[0.3, -0.4]], E, E).unwrap();
    let lin = LipFun::linear(a.clone());
    assert_eq!(dq_error(&lin, &d2, &v(&[0.5, 0.5]), &a, &r, 33, 0).unwrap(), Real::zero());
    let o = v(&[0.0]);
    assert_eq!(dq_error(&abs(), &line(), &o, &slope(0.0), &r, 9, 0).unwrap().to_f64(), 1.0);
    assert_eq!(dq_error(&abs(), &line(), &o, &slope(1.0), &r, 9, 0).unwrap().to_f64(), 2.0);
    let e = dq_error(&abs(), &line(), &v(&[0.9]), &slope(0.0), &r, 9, 0).unwrap_err();
    assert!(matches!(e, Error::BallEscapesDomain { .. }));
}

#[test]
fn tiny_scales_are_resolved() {
    let r = Real::pow2(-3000);
    let x = v(&[0.3]);
    let e = dq_error(&abs(), &line(), &x, &slope(1.0), &r, 9, 0).unwrap();
    assert!(e.to_f64() < 1e-30, "{e}");
    let e = dq_error(&abs(), &line(), &x, &slope(0.0), &r, 9, 0).unwrap();
    assert_eq!(e.to_f64(), 1.0);
}

#[test]
fn profile_of_linear_map_vanishes_and_detects_offsets() {
    let d2 = Domain::unit_box(2, E);
    let x = v(&[0.5, 0.5]);
    let a = LinearMap::from_rows(&[&[0.3, -0.4]], E, E).unwrap();
    let f = LipFun::linear(a.clone());
    let ladder = ScaleLadder::default_at(&d2, &x, 9, 1).unwrap();
    assert_eq!(ladder.radii().len(), 20);
    let p = dq_profile(&f, &d2, &x, &a, &ladder).unwrap();
    assert!(p.values.iter().all(|(_, e)| e.is_zero()));
    // ||L - A|| = 0.2 attained on the first axis, which the sample contains
    let l = LinearMap::from_rows(&[&[0.5, -0.4]], E, E).unwrap();
    let p = dq_profile(&f, &d2, &x, &l, &ladder).unwrap();
    assert!((p.score.to_f64() - 0.2).abs() < 1e-12, "{}", p.score);
}

#[test]
fn dini_examples() {
    let ladder = ScaleLadder::geometric(&Real::from_f64(0.5), &Real::ratio(1, 2), 10, 9, 0).unwrap();
    let neg = LipFun::norm_of(1, -1, E);
    let o = v(&[0.0]);
    assert_eq!(dini_lower(&neg, &line(), &o, &v(&[1.0]), &ladder).unwrap().lower.to_f64(), -1.0);
    assert_eq!(dini_lower(&neg, &line(), &o, &v(&[-1.0]), &ladder).unwrap().lower.to_f64(), -1.0);
    assert!(dini_empty_certificate(&neg, &line(), &o, &v(&[1.0]), &ladder, DINI_TOL).unwrap().fires);
    assert!(!dini_empty_certificate(&abs(), &line(), &o, &v(&[1.0]), &ladder, DINI_TOL).unwrap().fires);
    let f = LipFun::linear(LinearMap::from_rows(&[&[0.3, -0.4]], E, E).unwrap());
    let d2 = Domain::unit_box(2, E);
    let q = dini_lower(&f, &d2, &v(&[0.5, 0.5]), &v(&[1.0, 1.0]), &ladder).unwrap();
    assert!((q.lower.to_f64() + 0.1).abs() < 1e-15);
    let vec_valued = LipFun::identity(2, E);
    assert_eq!(dini_lower(&vec_valued, &d2, &v(&[0.5, 0.5]), &v(&[1.0, 0.0]), &ladder).unwrap_err(), Error::NotScalar(2));
}

#[test]
fn best_slope_for_abs_is_zero() {
    let q = Real::from_f64(0.5);
    let o = v(&[0.0]);
    let cands = [slope(-1.0), slope(0.0), slope(1.0)];
    let (i, e) = best_local_linear(&abs(), &line(), &o, &q, &cands, 9, 0).unwrap();
    // max(|1 - c|, |1 + c|) is 2, 1, 2 for c = -1, 0, 1
    assert_eq!((i, e.to_f64()), (1, 1.0));
    let a = LinearMap::from_rows(&[&[0.2]], E, E).unwrap();
    let f = LipFun::linear(a.clone());
    let (i, e) = best_local_linear(&f, &line(), &o, &q, &[a.clone(), a.scale(&Real::from_i64(2))], 9, 0).unwrap();
    assert_eq!((i, e), (0, Real::zero()));
    assert_eq!(best_local_linear(&f, &line(), &o, &q, &[slope(0.7)], 9, 0).unwrap().0, 0);
    assert_eq!(best_local_linear(&f, &line(), &o, &q, &[], 9, 0).unwrap_err(), Error::EmptyCandidates);
}

#[test]
fn ladder_injection_sorts_and_dedups() {
    let l = ScaleLadder::geometric(&Real::one(), &Real::ratio(1, 2), 3, 5, 0).unwrap();
    let l = l.with_injected(&[Real::from_f64(0.5), Real::from_f64(0.1)]).unwrap();
    let r: Vec<f64> = l.radii().iter().map(Real::to_f64).collect();
    assert_eq!(r, vec![1.0, 0.5, 0.25, 0.1]);
    assert!(ScaleLadder::new(vec![Real::zero()], 5, 0).is_err());
}

#[test]
fn report_has_header_and_rows() {
    let rows = vec![ProbeRow { x: v(&[0.5, 0.25]), op: "L1".into(), scale: Real::from_f64(0.125), value: Real::zero() }];
    assert_eq!(report_csv(&rows), "x1,x2,op,scale,dq\n0.5,0.25,L1,0.125,0\n");
}

fn tent(c: f64, a: f64, b: f64) -> LipFun {
    let k = E;
    LipFun::add_const(
        &LipFun::sum(
            &LipFun::scale(Real::from_f64(0.5), &LipFun::norm_of(2, -1, k)),
            &LipFun::linear(LinearMap::from_rows(&[&[a, b]], k, k).unwrap()),
        )
        .unwrap(),
        v(&[c]),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_shift_and_triangle_bound(c in -5.0f64..5.0, a in -0.5f64..0.5, b in -0.5f64..0.5,
                                         la in -1.0f64..1.0, lb in -1.0f64..1.0, x in 0.3f64..0.7, r in 0.01f64..0.25) {
        let d2 = Domain::unit_box(2, E);
        let p = v(&[x, 1.0 - x]);
        let l = LinearMap::from_rows(&[&[la * 0.7, lb * 0.7]], E, E).unwrap();
        let r = Real::from_f64(r);
        let e0 = dq_error(&tent(0.0, a, b), &d2, &p, &l, &r, 21, 4).unwrap();
        let e1 = dq_error(&tent(c, a, b), &d2, &p, &l, &r, 21, 4).unwrap();
        prop_assert!((e0.to_f64() - e1.to_f64()).abs() <= 1e-12);
        let bound = tent(c, a, b).lip_cert() + l.op_norm().unwrap() + 1e-9;
        prop_assert!(e0.to_f64() <= bound);
        if tent(c, a, b).is_one_lipschitz() && l.op_norm().unwrap() <= 1.0 {
            prop_assert!(e0.to_f64() <= 2.0 + 1e-12);
        }
    }
}
