use std::sync::Arc;

use psystem::energy::*;
use psystem::{make_cubic, make_quadratic, Error, StateField};

/// `f = (1 − u²)(4 + u)`: zero at ±1, positive and concave between.
fn skewed_weight() -> WeightFunction {
    WeightFunction::new(
        -1.0,
        1.0,
        Arc::new(|u| (1.0 - u * u) * (4.0 + u)),
        Arc::new(|u| 1.0 - 8.0 * u - 3.0 * u * u),
        Arc::new(|u| -8.0 - 6.0 * u),
        64,
    )
    .unwrap()
}

/// `u = 1/2 − t`, `v = x` on unevenly spaced frames.
fn exact_field() -> StateField {
    let times: Vec<f64> = (0..=30).map(|i| (i as f64 / 30.0).powi(2) * 0.9).collect();
    StateField::from_fn(make_cubic(), 32, 1.0, &times, |t, _| (0.5 - t, 0.0)).unwrap()
}

#[test]
fn identity_matches_closed_form() {
    let field = exact_field();
    let w = skewed_weight();
    for i in 0..field.len() {
        let u = 0.5 - field.frame(i).t;
        assert!((energy(&field, i, &w).unwrap() - w.f(u)).abs() < 1e-13);
        assert!((energy_ddot(&field, i, &w).unwrap() - w.d2(u)).abs() < 1e-12);
    }
    let r = concavity_monitor(&field, &w).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!(r.max_e_ddot < 0.0);
}

#[test]
fn default_weight_on_exact_field() {
    let field = exact_field();
    let r = concavity_monitor(&field, &default_weight(&make_cubic()).unwrap()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.trace.e_ddot_integral.iter().all(|&e| (e + 2.0).abs() < 1e-12));
    assert!(r.trace.e_ddot_fd[0].is_none() && r.trace.e_ddot_fd[field.len() - 1].is_none());
}

#[test]
fn non_solution_fails_the_cross_check() {
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let field = StateField::from_fn(make_cubic(), 32, 0.0, &times, |t, _| (0.3 + 0.2 * t * t, 0.0)).unwrap();
    let r = concavity_monitor(&field, &default_weight(&make_cubic()).unwrap()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(!r.cross_violations.is_empty());
    assert!(r.concavity_violations.is_empty());
}

#[test]
fn invalid_weights_are_rejected() {
    let convex = WeightFunction::new(-1.0, 1.0, Arc::new(|u| u * u - 1.0), Arc::new(|u| 2.0 * u), Arc::new(|_| 2.0), 16);
    assert!(convex.is_err());
    let offset = WeightFunction::new(-1.0, 1.0, Arc::new(|u| 2.0 - u * u), Arc::new(|u| -2.0 * u), Arc::new(|_| -2.0), 16);
    assert!(offset.is_err());
    assert!(matches!(
        WeightFunction::new(1.0, 1.0, Arc::new(|_| 0.0), Arc::new(|_| 0.0), Arc::new(|_| -1.0), 16),
        Err(Error::DegenerateInterval { .. })
    ));
    assert!(matches!(default_weight(&make_quadratic()), Err(Error::DegenerateInterval { .. })));
}

#[test]
fn hyperbolic_points_are_rejected() {
    let field = StateField::from_fn(make_cubic(), 16, 0.0, &[0.0], |_, x| (if x < 0.5 { 0.0 } else { 1.5 }, 0.0)).unwrap();
    match energy(&field, 0, &default_weight(&make_cubic()).unwrap()) {
        Err(Error::OutsideEllipticBand { frame: 0, points }) => assert_eq!(points, (8..16).collect::<Vec<_>>()),
        other => panic!("{other:?}"),
    }
}
