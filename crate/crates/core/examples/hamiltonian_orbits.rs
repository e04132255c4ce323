//! Trajectories of H = p²/2 + u(t, x), the conserved F = p³/3 + up + v on
//! solutions, and (m, n)-orbits forcing v = At + Bx + periodic to have A = B = 0.
//!
//! cargo run --release --example hamiltonian_orbits

use std::f64::consts::PI;

use psystem::hamiltonian::{analytic, f_drift, find_orbits, flow, reduction_check, OrbitOptions, SampledU, SampledV};
use psystem::{make_quadratic, StateField};

fn main() -> psystem::Result<()> {
    let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
    let winding = StateField::from_fn(make_quadratic(), 32, 1.0, &times, |t, _| (-t, 0.0))?;
    let (u, v) = (SampledU(&winding), SampledV(&winding));
    let tr = flow(&u, (0.0, 0.2, 0.9), 2.5)?;
    println!("u = −t, v = x: F drift {:.3e} over {} steps", f_drift(&u, &v, &tr), tr.samples.len() - 1);

    let cu = analytic(|_, x| (2.0 * PI * x).sin(), |_, x| 2.0 * PI * (2.0 * PI * x).cos());
    let zero = analytic(|_, _| 0.0, |_, _| 0.0);
    println!("static non-solution: F drift {:.3e}", f_drift(&cu, &zero, &flow(&cu, (0.0, 0.0, 1.0), 1.0)?));

    let pu = analytic(|_, x| 0.1 * (2.0 * PI * x).cos(), |_, x| -0.2 * PI * (2.0 * PI * x).sin());
    let orbits = find_orbits(&pu, &[(1, 0), (1, 1), (2, 1)], &OrbitOptions::default())?;
    for o in &orbits {
        println!(
            "({}, {}) orbit: action {:.10}, EL residual {:.1e}, {} iterations",
            o.m, o.n, o.action, o.euler_lagrange_residual, o.iterations
        );
    }
    // planted v = 0.5t + 2x: every closure reads off Am + Bn
    let pv = analytic(|t, x| 0.5 * t + 2.0 * x, |_, _| 2.0);
    let r = reduction_check(&pu, &pv, &orbits)?;
    println!("planted A = 0.5, B = 2: estimated A = {:.9}, B = {:.9}", r.a_est, r.b_est);
    for m in &r.orbits {
        println!("  ({}, {}): closure {:.9}, Am + Bn = {:.9}", m.m, m.n, m.closure, m.linear);
    }
    Ok(())
}
