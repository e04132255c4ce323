use std::f64::consts::PI;

use psystem::characteristics::*;
use psystem::evolution::{run, InitialData, RunSettings};
use psystem::riemann::{Family, Side};
use psystem::{make_quadratic, StateField};

fn times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect()
}

/// Steady `u = −1 − 0.2 sin 2πx`; only the path integrator is exercised.
fn steady() -> StateField {
    StateField::from_fn(make_quadratic(), 64, 0.0, &times(0.0, 2.0, 20), |_, x| {
        (-1.0 - 0.2 * (2.0 * PI * x).sin(), 0.0)
    })
    .unwrap()
}

#[test]
fn tracer_is_fourth_order() {
    let field = steady();
    let end = |dt: f64| {
        let opts = TraceOptions {
            dt: Some(dt),
            ..TraceOptions::default()
        };
        let p = Tracer::new(&field, opts).unwrap().trace((0.0, 0.1), Family::First, Direction::Forward).unwrap();
        assert!(matches!(p.termination, Termination::FieldEdge { .. }));
        p.last().x
    };
    let (a, b, c) = (end(0.1), end(0.05), end(0.025));
    let ratio = (a - b).abs() / (b - c).abs();
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn backward_retraces_forward() {
    let field = steady();
    let tracer = Tracer::new(&field, TraceOptions::default()).unwrap();
    let fwd = tracer.trace((0.0, 0.3), Family::Second, Direction::Forward).unwrap();
    let end = fwd.last();
    let back = tracer.trace((end.t, end.x.rem_euclid(1.0)), Family::Second, Direction::Backward).unwrap();
    let start = back.last();
    assert!((start.t - 0.0).abs() < 1e-12);
    let dx = (start.x - 0.3 - (end.x.rem_euclid(1.0) - end.x)).abs();
    assert!(dx < 1e-8, "{dx:e}");
}

/// `u = −1 + t`, `v = −x` reaches the boundary `u = 0` at `t = 1`, where
/// `∫k = 1 − (1 − t)^{−1/4}` diverges.
#[test]
fn k_integral_diverges_at_the_boundary() {
    let field = StateField::from_fn(make_quadratic(), 32, -1.0, &times(0.0, 1.0, 200), |t, _| (-1.0 + t, 0.0)).unwrap();
    let mut last = 0.0;
    for eps in [1e-4, 1e-6, 1e-8] {
        let opts = TraceOptions {
            eps_par: eps,
            ..TraceOptions::default()
        };
        let p = Tracer::new(&field, opts).unwrap().trace((0.0, 0.5), Family::First, Direction::Forward).unwrap();
        let Termination::BoundaryHit { t, .. } = p.termination else {
            panic!("expected a boundary hit, got {:?}", p.termination)
        };
        assert!(t <= 1.0 - eps * 0.999 && t >= 1.0 - 2.0 * eps, "eps {eps}: t {t}");
        let ki = p.last().k_integral;
        let exact = 1.0 - (1.0 - p.last().t).powf(-0.25);
        assert!((ki - exact).abs() < 1e-2 * exact.abs(), "eps {eps}: {ki} vs {exact}");
        assert!(ki < last);
        last = ki;
    }
    assert!(last < -80.0);
}

/// For a simple wave, `λ1` is constant along straight characteristics, so the
/// first crossing happens at `T = −1 / min_x ∂x λ1(u0(x))`.
#[test]
fn simple_wave_blowup_time() {
    let model = make_quadratic();
    let (base, amp) = (-1.0, 0.2);
    let data = InitialData::SimpleWave {
        base,
        amplitude: amp,
        mode: 1,
        phase: 0.0,
        family: Family::First,
    };
    // λ1 = √(−u): ∂x λ1 = −u′ / (2√(−u))
    let slope_min = (0..100_000)
        .map(|j| {
            let x = j as f64 / 100_000.0;
            let u = base + amp * (2.0 * PI * x).sin();
            let ux = 2.0 * PI * amp * (2.0 * PI * x).cos();
            -ux / (2.0 * (-u).sqrt())
        })
        .fold(f64::INFINITY, f64::min);
    let t_oracle = -1.0 / slope_min;

    let settings = RunSettings {
        t_max: 50.0,
        ..Default::default()
    };
    let (field, report) = run(&model, data.frame(&model, 256, 0.0).unwrap(), 0.0, &settings).unwrap();
    let opts = TraceOptions {
        extrapolate: 0.1,
        ..TraceOptions::default()
    };
    let survey = blowup_survey(&field, 64, &opts).unwrap();
    let t_pred = earliest_blowup(&survey).unwrap();
    assert!((t_pred - t_oracle).abs() / t_oracle < 0.02, "{t_pred} vs {t_oracle}");
    assert!((report.t_end - t_oracle).abs() / t_oracle < 0.05, "{} vs {t_oracle}", report.t_end);
    // only the first family steepens
    assert!(survey
        .iter()
        .filter(|s| s.family == Family::Second)
        .all(|s| s.predicted_blowup.is_none_or(|t| t > t_pred * 1.5)));
}

#[test]
fn paths_stay_in_their_component() {
    let model = make_quadratic();
    let data = InitialData::Sine {
        base: -0.3,
        amplitude: 0.25,
        mode: 1,
        phase: 0.0,
        v_amplitude: 0.05,
        v_mode: 1,
        v_phase: 0.0,
    };
    let (field, _) = run(&model, data.frame(&model, 128, 0.0).unwrap(), 0.0, &RunSettings::default()).unwrap();
    let tracer = Tracer::new(&field, TraceOptions::default()).unwrap();
    for i in 0..8 {
        for fam in [Family::First, Family::Second] {
            let p = tracer.trace((0.0, i as f64 / 8.0), fam, Direction::Forward).unwrap();
            assert_eq!(p.side, Side::Alpha);
            assert!(p.samples.iter().all(|s| s.u < model.alpha()));
        }
    }
}

#[test]
fn unbounded_pair_flags_the_winding_family_only() {
    let model = make_quadratic();
    // u = −2t, v = 2x: −u grows without bound along every characteristic
    let winding = StateField::from_fn(model.clone(), 32, 2.0, &times(0.5, 12.0, 230), |t, _| (-2.0 * t, 0.0)).unwrap();
    let r = unbounded_pair_monitor(&winding, 12.0, 8, GROWTH_THRESHOLD).unwrap();
    assert!(r.flag_forward && r.flag);
    assert!(!r.intersections.is_empty());
    for i in &r.intersections {
        assert!(i.gap > 0.0);
    }

    let constant = StateField::from_fn(model, 32, 0.0, &times(0.0, 12.0, 120), |_, _| (-1.0, 0.0)).unwrap();
    let r = unbounded_pair_monitor(&constant, 12.0, 8, GROWTH_THRESHOLD).unwrap();
    assert!(!r.flag);
    assert_eq!(r.counts["First"].a_plus, 8);
}
