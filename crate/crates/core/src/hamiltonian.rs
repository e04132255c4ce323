//! Particle dynamics in the potential `u(t, x)` for `σ = u²/2`.
//!
//! For this law the p-system is equivalent to `F = p³/3 + u p + v` being a
//! first integral of `ẋ = p`, `ṗ = −u_x`. Closed orbits of type `(m, n)`
//! then force the linear part of `v = At + Bx + ṽ` to satisfy `Am + Bn = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::StateField;

pub const DEFAULT_DT: f64 = 1e-3;
pub const NODES_PER_UNIT_TIME: usize = 512;

/// A scalar function on the cylinder with its x-derivative.
pub trait ScalarField: Sync {
    fn value(&self, t: f64, x: f64) -> f64;
    fn dx(&self, t: f64, x: f64) -> f64;
}

/// Closed-form field from a value and an x-derivative closure.
pub struct Analytic<F, G> {
    f: F,
    g: G,
}

pub fn analytic<F, G>(f: F, g: G) -> Analytic<F, G>
where
    F: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> f64 + Sync,
{
    Analytic { f, g }
}

impl<F, G> ScalarField for Analytic<F, G>
where
    F: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }

    fn dx(&self, t: f64, x: f64) -> f64 {
        (self.g)(t, x)
    }
}

/// Constant field.
pub fn constant(c: f64) -> impl ScalarField {
    analytic(move |_, _| c, |_, _| 0.0)
}

/// `u` of a stored solution, interpolated like the characteristic tracer does.
/// Outside the stored time span it evaluates to NaN.
pub struct SampledU<'a>(pub &'a StateField);

/// Full `v` (periodic part plus `C·x`) of a stored solution.
pub struct SampledV<'a>(pub &'a StateField);

impl ScalarField for SampledU<'_> {
    fn value(&self, t: f64, x: f64) -> f64 {
        self.0.sample(t, x).map_or(f64::NAN, |s| s.u)
    }

    fn dx(&self, t: f64, x: f64) -> f64 {
        self.0.sample(t, x).map_or(f64::NAN, |s| s.u_x)
    }
}

impl ScalarField for SampledV<'_> {
    fn value(&self, t: f64, x: f64) -> f64 {
        self.0.sample(t, x).map_or(f64::NAN, |s| s.v)
    }

    fn dx(&self, t: f64, x: f64) -> f64 {
        self.0.sample(t, x).map_or(f64::NAN, |s| s.v_x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    /// Unwrapped.
    pub x: f64,
    pub p: f64,
    /// `p²/2 + u`.
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<PhasePoint>,
}

impl Trajectory {
    /// `F = p³/3 + u p + v` at every sample.
    pub fn integral(&self, u: &dyn ScalarField, v: &dyn ScalarField) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| f_value(u, v, s.t, s.x, s.p))
            .collect()
    }

    pub fn last(&self) -> &PhasePoint {
        self.samples.last().expect("trajectories hold their start point")
    }
}

pub fn f_value(u: &dyn ScalarField, v: &dyn ScalarField, t: f64, x: f64, p: f64) -> f64 {
    p * p * p / 3.0 + u.value(t, x) * p + v.value(t, x)
}

/// Integrates `ẋ = p`, `ṗ = −u_x` from `start = (t0, x0, p0)` to `t_end` with RK4 at step `dt`.
pub fn flow_with_step(u: &dyn ScalarField, start: (f64, f64, f64), t_end: f64, dt: f64) -> Result<Trajectory> {
    let (t0, x0, p0) = start;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {dt}")));
    }
    let span = t_end - t0;
    let steps = (span.abs() / dt).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let rhs = |t: f64, x: f64, p: f64| (p, -u.dx(t, x));
    let point = |t: f64, x: f64, p: f64| PhasePoint {
        t,
        x,
        p,
        h: 0.5 * p * p + u.value(t, x),
    };
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(point(t0, x0, p0));
    let (mut x, mut p) = (x0, p0);
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, x, p);
        let k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1.0, p + 0.5 * h * k1.1);
        let k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2.0, p + 0.5 * h * k2.1);
        let k4 = rhs(t + h, x + h * k3.0, p + h * k3.1);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        p += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(x.is_finite() && p.is_finite()) {
            return Err(Error::StepFailure(format!("non-finite state after t = {t}")));
        }
        let t_next = if i + 1 == steps { t_end } else { t0 + (i + 1) as f64 * h };
        samples.push(point(t_next, x, p));
    }
    Ok(Trajectory { samples })
}

pub fn flow(u: &dyn ScalarField, start: (f64, f64, f64), t_end: f64) -> Result<Trajectory> {
    flow_with_step(u, start, t_end, DEFAULT_DT)
}

/// `max |F(t) − F(t0)|` along the trajectory.
pub fn f_drift(u: &dyn ScalarField, v: &dyn ScalarField, traj: &Trajectory) -> f64 {
    let f = traj.integral(u, v);
    let f0 = f[0];
    f.iter().map(|x| (x - f0).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MNOrbit {
    pub m: u32,
    pub n: i32,
    /// Node `i` at `t_i = t0 + iΔt`, with `p_i = (x_{i+1} − x_i)/Δt`.
    pub trajectory: Trajectory,
    pub action: f64,
    /// `max_i |(x_{i+1} − 2x_i + x_{i−1})/Δt² + u_x(t_i, x_i)|`.
    pub euler_lagrange_residual: f64,
    pub iterations: usize,
}

impl MNOrbit {
    pub fn dt(&self) -> f64 {
        self.m as f64 / self.trajectory.samples.len() as f64
    }

    /// Flows the continuous system for one period from the first node (with
    /// the centred-difference momentum) and returns
    /// `(|x(t0+m) − x0 − n|, |p(t0+m) − p0|)`.
    pub fn closure_residual(&self, u: &dyn ScalarField) -> Result<(f64, f64)> {
        let s = &self.trajectory.samples;
        let dt = self.dt();
        let x_prev = s[s.len() - 1].x - self.n as f64;
        let p0 = (s[1].x - x_prev) / (2.0 * dt);
        let start = (s[0].t, s[0].x, p0);
        let tr = flow(u, start, s[0].t + self.m as f64)?;
        let end = tr.last();
        Ok(((end.x - s[0].x - self.n as f64).abs(), (end.p - p0).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitOptions {
    pub t0: f64,
    pub x0: f64,
    pub nodes_per_unit_time: usize,
    /// Stop when the discrete Euler–Lagrange residual falls below this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            t0: 0.0,
            x0: 0.0,
            nodes_per_unit_time: NODES_PER_UNIT_TIME,
            tol: 1e-9,
            max_iterations: 500_000,
        }
    }
}

struct Loop<'a> {
    u: &'a dyn ScalarField,
    k: usize,
    dt: f64,
    shift: f64,
    t0: f64,
}

impl Loop<'_> {
    fn next(&self, x: &[f64], i: usize) -> f64 {
        if i + 1 == self.k {
            x[0] + self.shift
        } else {
            x[i + 1]
        }
    }

    fn prev(&self, x: &[f64], i: usize) -> f64 {
        if i == 0 {
            x[self.k - 1] - self.shift
        } else {
            x[i - 1]
        }
    }

    fn action(&self, x: &[f64]) -> f64 {
        (0..self.k)
            .map(|i| {
                let v = (self.next(x, i) - x[i]) / self.dt;
                (0.5 * v * v - self.u.value(self.t0 + i as f64 * self.dt, x[i])) * self.dt
            })
            .sum()
    }

    /// Gradient of the action divided by `Δt`, i.e. minus the discrete EL residual.
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let dt2 = self.dt * self.dt;
        for i in 0..self.k {
            let acc = (self.next(x, i) - 2.0 * x[i] + self.prev(x, i)) / dt2;
            g[i] = -acc - self.u.dx(self.t0 + i as f64 * self.dt, x[i]);
        }
    }
}

/// Minimises the discrete action over loops with `x(t + m) = x(t) + n` using
/// Barzilai–Borwein gradient steps from the straight line `x0 + (n/m)t`.
pub fn find_mn_orbit(u: &dyn ScalarField, m: u32, n: i32, opts: &OrbitOptions) -> Result<MNOrbit> {
    if m == 0 {
        return Err(Error::InvalidInput("orbit period m must be positive".into()));
    }
    let k = opts.nodes_per_unit_time.max(8) * m as usize;
    let dt = m as f64 / k as f64;
    let lp = Loop {
        u,
        k,
        dt,
        shift: n as f64,
        t0: opts.t0,
    };
    let slope = n as f64 / m as f64;
    let mut x: Vec<f64> = (0..k).map(|i| opts.x0 + slope * i as f64 * dt).collect();
    let mut g = vec![0.0; k];
    let mut x_old = x.clone();
    let mut g_old = vec![0.0; k];
    lp.gradient(&x, &mut g);
    // the kinetic part has curvature up to 4/Δt²; start safely below it
    let mut step = 0.1 * dt * dt;
    let norm = |g: &[f64]| g.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut res = norm(&g);
    let mut it = 0;
    while res > opts.tol {
        if it >= opts.max_iterations || !res.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: res,
            });
        }
        x_old.copy_from_slice(&x);
        g_old.copy_from_slice(&g);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        lp.gradient(&x, &mut g);
        let (mut sy, mut ss) = (0.0, 0.0);
        for i in 0..k {
            let s = x[i] - x_old[i];
            sy += s * (g[i] - g_old[i]);
            ss += s * s;
        }
        // alternate the two BB lengths; fall back to a safe step on non-positive curvature
        step = if sy > 0.0 {
            if it % 2 == 0 {
                ss / sy
            } else {
                let yy: f64 = (0..k).map(|i| (g[i] - g_old[i]).powi(2)).sum();
                sy / yy
            }
        } else {
            0.1 * dt * dt
        };
        res = norm(&g);
        it += 1;
    }
    let samples = (0..k)
        .map(|i| {
            let t = opts.t0 + i as f64 * dt;
            let p = (lp.next(&x, i) - x[i]) / dt;
            PhasePoint {
                t,
                x: x[i],
                p,
                h: 0.5 * p * p + u.value(t, x[i]),
            }
        })
        .collect();
    Ok(MNOrbit {
        m,
        n,
        trajectory: Trajectory { samples },
        action: lp.action(&x),
        euler_lagrange_residual: res,
        iterations: it,
    })
}

/// Searches several `(m, n)` orbits concurrently; results keep the input order.
pub fn find_orbits(u: &dyn ScalarField, types: &[(u32, i32)], opts: &OrbitOptions) -> Result<Vec<MNOrbit>> {
    types
        .par_iter()
        .map(|&(m, n)| find_mn_orbit(u, m, n, opts))
        .collect()
}

/// `v = At + Bx + ṽ` with `ṽ` periodic in both variables.
pub struct VDecomposition<'a> {
    pub a: f64,
    pub b: f64,
    v: &'a dyn ScalarField,
}

impl VDecomposition<'_> {
    pub fn v_tilde(&self, t: f64, x: f64) -> f64 {
        self.v.value(t, x) - self.a * t - self.b * x
    }
}

/// Estimates `A` and `B` from unit-period differences of `v` averaged over
/// `samples` points: `A = ⟨v(t+1, x) − v(t, x)⟩`, `B = ⟨v(t, x+1) − v(t, x)⟩`.
pub fn decompose(v: &dyn ScalarField, t0: f64, samples: usize) -> VDecomposition<'_> {
    let n = samples.max(1);
    let pts = (0..n).map(|i| (i as f64 + 0.5) / n as f64);
    let (mut a, mut b) = (0.0, 0.0);
    for s in pts {
        a += v.value(t0 + 1.0, s) - v.value(t0, s);
        b += v.value(t0 + s, 1.0 + s) - v.value(t0 + s, s);
    }
    VDecomposition {
        a: a / n as f64,
        b: b / n as f64,
        v,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitMismatch {
    pub m: u32,
    pub n: i32,
    /// `F(t0 + m, x0 + n, p0) − F(t0, x0, p0)`.
    pub closure: f64,
    /// `A m + B n` from the decomposition.
    pub linear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub a_est: f64,
    pub b_est: f64,
    pub orbits: Vec<OrbitMismatch>,
    pub max_mismatch: f64,
}

/// Evaluates the F-closure of each orbit; on a true solution it equals `Am + Bn`
/// and must vanish, which forces `A = B = 0` once two independent orbits exist.
pub fn reduction_check(u: &dyn ScalarField, v: &dyn ScalarField, orbits: &[MNOrbit]) -> Result<ReductionReport> {
    let t0 = orbits.first().map_or(0.0, |o| o.trajectory.samples[0].t);
    let dec = decompose(v, t0, 64);
    if !(dec.a.is_finite() && dec.b.is_finite()) {
        return Err(Error::InvalidInput(
            "v must be defined over a full unit period in t and x".into(),
        ));
    }
    let mut out = Vec::with_capacity(orbits.len());
    for o in orbits {
        let s = o.trajectory.samples[0];
        let (m, n) = (o.m as f64, o.n as f64);
        let closure = f_value(u, v, s.t + m, s.x + n, s.p) - f_value(u, v, s.t, s.x, s.p);
        out.push(OrbitMismatch {
            m: o.m,
            n: o.n,
            closure,
            linear: dec.a * m + dec.b * n,
        });
    }
    let max_mismatch = out.iter().map(|o| o.closure.abs()).fold(0.0, f64::max);
    Ok(ReductionReport {
        a_est: dec.a,
        b_est: dec.b,
        orbits: out,
        max_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_particle() {
        for u in [constant(0.0), constant(3.5)] {
            let tr = flow(&u, (0.0, 0.0, 1.0), 2.0).unwrap();
            for s in &tr.samples {
                assert!((s.x - s.t).abs() < 1e-12);
                assert_eq!(s.p, 1.0);
            }
        }
    }

    #[test]
    fn linear_in_time_potential() {
        let u = analytic(|t, _| -2.0 * t, |_, _| 0.0);
        let tr = flow(&u, (0.0, 0.3, 0.7), 1.0).unwrap();
        let end = tr.last();
        assert!((end.x - 1.0).abs() < 1e-12);
        assert!((end.h - (0.245 - 2.0)).abs() < 1e-12);
        let v = analytic(|_, x| 2.0 * x, |_, _| 2.0);
        assert!(f_drift(&u, &v, &tr) < 1e-12);
    }

    #[test]
    fn drift_examples() {
        let u = constant(1.0);
        let v = constant(0.0);
        assert_eq!(f_drift(&u, &v, &flow(&u, (0.0, 0.1, 0.5), 1.0).unwrap()), 0.0);
        let u = analytic(|_, x| (2.0 * PI * x).sin(), |_, x| 2.0 * PI * (2.0 * PI * x).cos());
        let d = f_drift(&u, &v, &flow(&u, (0.0, 0.0, 1.0), 1.0).unwrap());
        assert!(d >= 0.01, "{d}");
    }

    #[test]
    fn free_orbits() {
        let u = constant(0.0);
        let o = find_mn_orbit(&u, 1, 1, &OrbitOptions::default()).unwrap();
        for s in &o.trajectory.samples {
            assert!((s.x - s.t).abs() < 1e-12 && (s.p - 1.0).abs() < 1e-12);
        }
        let o = find_mn_orbit(&u, 2, 1, &OrbitOptions::default()).unwrap();
        assert_eq!(o.trajectory.samples.len(), 1024);
        for s in &o.trajectory.samples {
            assert!((s.x - 0.5 * s.t).abs() < 1e-12 && (s.p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn reduction_examples() {
        let u = constant(0.0);
        let orbits = find_orbits(&u, &[(1, 0), (1, 1), (2, 1)], &OrbitOptions::default()).unwrap();
        let r = reduction_check(&u, &constant(0.25), &orbits).unwrap();
        assert_eq!((r.a_est, r.b_est, r.max_mismatch), (0.0, 0.0, 0.0));

        let planted = analytic(|_, x| 2.0 * x + 0.1 * (2.0 * PI * x).sin(), |_, _| 0.0);
        let r = reduction_check(&u, &planted, &orbits[1..2]).unwrap();
        assert!((r.orbits[0].closure - 2.0).abs() < 1e-12);
        assert!((r.b_est - 2.0).abs() < 1e-12);

        let o20 = find_mn_orbit(&u, 2, 0, &OrbitOptions::default()).unwrap();
        let r = reduction_check(&u, &analytic(|t, _| 3.0 * t, |_, _| 0.0), &[o20]).unwrap();
        assert!((r.max_mismatch - 6.0).abs() < 1e-12);
        assert!((r.a_est - 3.0).abs() < 1e-12);
    }
}
