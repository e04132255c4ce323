use std::f64::consts::PI;

use psystem::evolution::{first_nonhyperbolic, run, InitialData, RunSettings, StopPolicy, StopReason};
use psystem::{make_cubic, make_quadratic};

fn sine(base: f64, amplitude: f64, v_amplitude: f64) -> InitialData {
    InitialData::Sine {
        base,
        amplitude,
        mode: 1,
        phase: 0.0,
        v_amplitude,
        v_mode: 1,
        v_phase: 0.0,
    }
}

fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

/// About `u = −1` the linearisation is the unit-speed wave equation, so
/// `u = −1 + ε sin(2πx) cos(2πt)` up to `O(ε²)`.
#[test]
fn small_amplitude_matches_dalembert() {
    let model = make_quadratic();
    let eps = 1e-6;
    let settings = RunSettings {
        t_max: 0.3,
        ..Default::default()
    };
    let (field, report) = run(&model, sine(-1.0, eps, 0.0).frame(&model, 64, 0.0).unwrap(), 0.0, &settings).unwrap();
    assert_eq!(report.stop, StopReason::TimeLimit);
    let last = field.last().unwrap();
    let worst = last
        .u
        .iter()
        .enumerate()
        .map(|(j, &u)| {
            let x = j as f64 / 64.0;
            (u - (-1.0 + eps * (2.0 * PI * x).sin() * (2.0 * PI * last.t).cos())).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-11, "{worst:e}");
}

#[test]
fn means_are_conserved_without_winding() {
    let model = make_cubic();
    let settings = RunSettings {
        t_max: 1.0,
        ..Default::default()
    };
    let (field, _) = run(&model, sine(-2.0, 0.1, 0.05).frame(&model, 128, 0.0).unwrap(), 0.0, &settings).unwrap();
    let (u0, v0) = (mean(&field.frame(0).u), mean(&field.frame(0).v_periodic));
    for f in field.frames() {
        assert!((mean(&f.u) - u0).abs() < 1e-12);
        assert!((mean(&f.v_periodic) - v0).abs() < 1e-12);
    }
}

#[test]
fn winding_drains_the_mean_of_u() {
    let model = make_quadratic();
    let c = 0.5;
    let settings = RunSettings {
        t_max: 1.0,
        ..Default::default()
    };
    let (field, _) = run(&model, sine(-1.0, 0.1, 0.0).frame(&model, 128, 0.0).unwrap(), c, &settings).unwrap();
    let u0 = mean(&field.frame(0).u);
    for f in field.frames() {
        assert!((mean(&f.u) - (u0 - c * f.t)).abs() < 1e-12);
    }
}

#[test]
fn constant_data_runs_to_the_limit() {
    let model = make_quadratic();
    let settings = RunSettings {
        t_max: 3.0,
        ..Default::default()
    };
    let (field, report) = run(&model, InitialData::Constant { u: -1.0, v: 0.2 }.frame(&model, 32, 0.0).unwrap(), 0.0, &settings).unwrap();
    assert_eq!(report.stop, StopReason::TimeLimit);
    assert!(report.blowup.is_none() && report.t_prime.is_none());
    let last = field.last().unwrap();
    assert!(last.u.iter().all(|&u| (u + 1.0).abs() < 1e-14));
}

#[test]
fn data_pushed_into_the_band_stops() {
    let model = make_quadratic();
    let data = sine(-0.05, 0.0, 0.01);
    let settings = RunSettings {
        t_max: 50.0,
        ..Default::default()
    };
    let (field, report) = run(&model, data.frame(&model, 256, 0.0).unwrap(), 0.0, &settings).unwrap();
    assert_eq!(report.stop, StopReason::EllipticOnset);
    let t_prime = report.t_prime.expect("component exit is recorded");
    assert!(t_prime > 0.0 && t_prime <= report.t_end);
    // the offending frame is kept as the last one
    assert_eq!(first_nonhyperbolic(&field).unwrap(), Some(t_prime));
    assert_eq!(field.last().unwrap().t, t_prime);

    let continued = RunSettings {
        t_max: t_prime + 0.05,
        stop_policy: StopPolicy::Continue,
        ..Default::default()
    };
    let (_, report) = run(&model, data.frame(&model, 256, 0.0).unwrap(), 0.0, &continued).unwrap();
    assert!(report.advisory);
}

#[test]
fn gradient_blowup_is_detected_not_an_error() {
    let model = make_quadratic();
    let settings = RunSettings {
        t_max: 50.0,
        ..Default::default()
    };
    let (_, report) = run(&model, sine(-1.0, 0.4, 0.0).frame(&model, 128, 0.0).unwrap(), 0.0, &settings).unwrap();
    assert_eq!(report.stop, StopReason::BlowUpSuspected);
    let b = report.blowup.unwrap();
    assert_eq!(b.last_valid_time, report.t_end);
    assert!(report.t_end < 50.0);
}

#[test]
fn resolution_refinement_converges() {
    let model = make_quadratic();
    let data = sine(-1.0, 0.1, 0.0);
    let settings = RunSettings {
        t_max: 0.2,
        ..Default::default()
    };
    let finals: Vec<Vec<f64>> = [128usize, 256, 512]
        .iter()
        .map(|&n| run(&model, data.frame(&model, n, 0.0).unwrap(), 0.0, &settings).unwrap().0.last().unwrap().u.clone())
        .collect();
    let diff = |a: &[f64], b: &[f64]| (0..a.len()).map(|j| (a[j] - b[2 * j]).abs()).fold(0.0, f64::max);
    let order = (diff(&finals[0], &finals[1]) / diff(&finals[1], &finals[2])).log2();
    assert!(order >= 3.9, "order {order}");
}
