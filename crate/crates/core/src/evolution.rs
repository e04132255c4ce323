//! Method-of-lines evolution of `u_t = −v_x`, `v_t = (σ(u))_x` on the circle.
//!
//! Space is discretised by trigonometric collocation, time by classical RK4.
//! `v` is evolved through its periodic part; the winding constant `C` enters
//! `v_x` analytically, so `v(t, x + 1) = v(t, x) + C` holds exactly. The scheme
//! is meant for smooth solutions up to the loss of regularity, which is
//! detected (gradient and spectral-tail monitors), not continued through.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constitutive::{PointClass, SigmaModel};
use crate::error::{Error, RejectReason, Result};
use crate::field::{Frame, StateField};
use crate::riemann::{Family, QTransform};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// `dt = cfl · dx / max(max √|σ′(u)|, lambda_floor)`.
    pub cfl: f64,
    pub lambda_floor: f64,
    /// Apply the order-16 exponential filter after every step.
    pub filter: bool,
    /// Blow-up is declared when `max |u_x|` exceeds this.
    pub grad_max: f64,
    /// ... or when the spectral tail fraction of `u` or `v` exceeds this.
    pub tail_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cfl: 0.4,
            lambda_floor: 0.1,
            filter: false,
            grad_max: 1e3,
            tail_max: 1e-4,
        }
    }
}

/// Advances single frames; owns the FFT plans and work buffers.
pub struct Solver {
    model: SigmaModel,
    n: usize,
    winding_c: f64,
    opts: SolverOptions,
    spectral: Spectral,
    work: Vec<f64>,
}

impl Solver {
    pub fn new(model: SigmaModel, n: usize, winding_c: f64, opts: SolverOptions) -> Self {
        Solver {
            model,
            n,
            winding_c,
            opts,
            spectral: Spectral::new(n),
            work: vec![0.0; n],
        }
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Right-hand side: `u_t = −(v_p)_x − C`, `(v_p)_t = (σ(u))_x`.
    fn rhs(&mut self, u: &[f64], vp: &[f64], du: &mut [f64], dvp: &mut [f64]) {
        self.spectral.derivative(vp, du);
        for d in du.iter_mut() {
            *d = -*d - self.winding_c;
        }
        for (w, &ui) in self.work.iter_mut().zip(u) {
            *w = self.model.sigma(ui);
        }
        let work = std::mem::take(&mut self.work);
        self.spectral.derivative(&work, dvp);
        self.work = work;
    }

    /// Time step allowed by the CFL rule for state `u`.
    pub fn stable_dt(&self, u: &[f64]) -> f64 {
        let speed = u
            .iter()
            .map(|&v| self.model.speed_scale(v))
            .fold(self.opts.lambda_floor, f64::max);
        self.opts.cfl / (self.n as f64 * speed)
    }

    /// One RK4 step (plus optional filter) followed by the smoothness checks.
    pub fn advance(&mut self, frame: &Frame, dt: f64) -> Result<Frame> {
        let n = self.n;
        let (u0, v0) = (&frame.u, &frame.v_periodic);
        let mut ku = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut kv = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut us = vec![0.0; n];
        let mut vs = vec![0.0; n];

        let [k1u, k2u, k3u, k4u] = &mut ku;
        let [k1v, k2v, k3v, k4v] = &mut kv;
        self.rhs(u0, v0, k1u, k1v);
        stage(u0, k1u, 0.5 * dt, &mut us);
        stage(v0, k1v, 0.5 * dt, &mut vs);
        self.rhs(&us, &vs, k2u, k2v);
        stage(u0, k2u, 0.5 * dt, &mut us);
        stage(v0, k2v, 0.5 * dt, &mut vs);
        self.rhs(&us, &vs, k3u, k3v);
        stage(u0, k3u, dt, &mut us);
        stage(v0, k3v, dt, &mut vs);
        self.rhs(&us, &vs, k4u, k4v);

        let c = dt / 6.0;
        let mut u: Vec<f64> = (0..n)
            .map(|j| u0[j] + c * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]))
            .collect();
        let mut v: Vec<f64> = (0..n)
            .map(|j| v0[j] + c * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]))
            .collect();
        if self.opts.filter {
            self.spectral.filter(&mut u);
            self.spectral.filter(&mut v);
        }
        let next = Frame {
            t: frame.t + dt,
            u,
            v_periodic: v,
        };
        if let Some(reason) = self.check(&next).rejection {
            return Err(Error::StepRejected { t: frame.t, reason });
        }
        Ok(next)
    }

    /// Smoothness diagnostics of a frame.
    pub fn check(&mut self, frame: &Frame) -> Smoothness {
        if frame.u.iter().chain(&frame.v_periodic).any(|x| !x.is_finite()) {
            return Smoothness {
                max_grad: f64::INFINITY,
                tail: f64::INFINITY,
                rejection: Some(RejectReason::NonFinite),
            };
        }
        let ux = self.spectral.derivative_vec(&frame.u);
        let max_grad = ux.iter().fold(0.0_f64, |m, &g| m.max(g.abs()));
        let tail = self
            .spectral
            .tail_fraction(&frame.u)
            .max(self.spectral.tail_fraction(&frame.v_periodic));
        let rejection = if max_grad > self.opts.grad_max {
            Some(RejectReason::Gradient { max_grad })
        } else if tail > self.opts.tail_max {
            Some(RejectReason::SpectralTail { tail })
        } else {
            None
        };
        Smoothness {
            max_grad,
            tail,
            rejection,
        }
    }
}

fn stage(y0: &[f64], k: &[f64], h: f64, out: &mut [f64]) {
    for ((o, &a), &b) in out.iter_mut().zip(y0).zip(k) {
        *o = a + h * b;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothness {
    pub max_grad: f64,
    pub tail: f64,
    pub rejection: Option<RejectReason>,
}

/// Appends one frame advanced by `dt` from the latest frame of `field`.
pub fn step(field: &mut StateField, dt: f64, opts: &SolverOptions) -> Result<()> {
    let last = field
        .last()
        .ok_or(Error::InsufficientFrames { index: 0, len: 0 })?
        .clone();
    let mut solver = Solver::new(field.model().clone(), field.n_x(), field.winding_c(), *opts);
    let pre = solver.check(&last);
    if let Some(reason) = pre.rejection {
        return Err(Error::StepRejected { t: last.t, reason });
    }
    let next = solver.advance(&last, dt)?;
    field.push(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopPolicy {
    /// Keep going through mixed and elliptic frames (output there is advisory).
    Continue,
    /// Stop at the first frame that is not inside a single hyperbolic component.
    StopOnMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TimeLimit,
    BlowUpSuspected,
    EllipticOnset,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub t_max: f64,
    pub solver: SolverOptions,
    pub stop_policy: StopPolicy,
    /// Store every `save_every`-th accepted step (the last one is always stored).
    pub save_every: usize,
    pub max_steps: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            t_max: 10.0,
            solver: SolverOptions::default(),
            stop_policy: StopPolicy::StopOnMixed,
            save_every: 1,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    /// Time of the last accepted frame.
    pub last_valid_time: f64,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub stop: StopReason,
    pub t_end: f64,
    pub steps: usize,
    pub blowup: Option<BlowUp>,
    /// First time the solution leaves its initial hyperbolic component.
    pub t_prime: Option<f64>,
    /// Some frame contained elliptic points; anything computed there is advisory.
    pub advisory: bool,
    /// `(t, max |u_x|)` for every accepted step.
    pub grad_history: Vec<(f64, f64)>,
    /// `(t, spectral tail fraction)` for every accepted step.
    pub tail_history: Vec<(f64, f64)>,
}

/// Evolves `initial` until `t_max`, suspected blow-up, or elliptic onset.
pub fn run(
    model: &SigmaModel,
    initial: Frame,
    winding_c: f64,
    settings: &RunSettings,
) -> Result<(StateField, RunReport)> {
    let n = initial.u.len();
    let mut field = StateField::new(model.clone(), n, winding_c)?;
    let mut solver = Solver::new(model.clone(), n, winding_c, settings.solver);
    let start_tag = hyperbolic_tag(model, &initial.u);

    let mut report = RunReport {
        stop: StopReason::TimeLimit,
        t_end: initial.t,
        steps: 0,
        blowup: None,
        t_prime: None,
        advisory: false,
        grad_history: Vec::new(),
        tail_history: Vec::new(),
    };
    let first = solver.check(&initial);
    report.grad_history.push((initial.t, first.max_grad));
    report.tail_history.push((initial.t, first.tail));
    report.advisory = has_elliptic(model, &initial.u);
    if start_tag.is_none() {
        report.t_prime = Some(initial.t);
    }
    let t_max = settings.t_max;
    let mut current = initial;
    field.push(current.clone())?;

    if let Some(reason) = first.rejection {
        report.stop = StopReason::BlowUpSuspected;
        report.blowup = Some(BlowUp {
            last_valid_time: current.t,
            reason,
        });
        return Ok((field, report));
    }
    if start_tag.is_none() && settings.stop_policy == StopPolicy::StopOnMixed {
        report.stop = StopReason::EllipticOnset;
        return Ok((field, report));
    }

    let save_every = settings.save_every.max(1);
    let mut unsaved = false;
    let eps_t = 1e-12 * t_max.abs().max(1.0);
    while current.t < t_max - eps_t {
        if report.steps >= settings.max_steps {
            report.stop = StopReason::StepLimit;
            break;
        }
        let dt = solver.stable_dt(&current.u).min(t_max - current.t);
        match solver.advance(&current, dt) {
            Ok(next) => {
                current = next;
                report.steps += 1;
                let s = solver.check(&current);
                report.grad_history.push((current.t, s.max_grad));
                report.tail_history.push((current.t, s.tail));
                if has_elliptic(model, &current.u) {
                    report.advisory = true;
                }
                let left = match start_tag {
                    Some(tag) => current.u.iter().any(|&u| model.classify(u) != tag),
                    None => false,
                };
                if left && report.t_prime.is_none() {
                    report.t_prime = Some(current.t);
                }
                if report.steps.is_multiple_of(save_every) || left {
                    field.push(current.clone())?;
                    unsaved = false;
                } else {
                    unsaved = true;
                }
                if left && settings.stop_policy == StopPolicy::StopOnMixed {
                    report.stop = StopReason::EllipticOnset;
                    break;
                }
            }
            Err(Error::StepRejected { reason, .. }) => {
                report.stop = StopReason::BlowUpSuspected;
                report.blowup = Some(BlowUp {
                    last_valid_time: current.t,
                    reason,
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if unsaved {
        field.push(current.clone())?;
    }
    report.t_end = current.t;
    Ok((field, report))
}

fn hyperbolic_tag(model: &SigmaModel, u: &[f64]) -> Option<PointClass> {
    let tag = model.classify(*u.first()?);
    (tag.is_hyperbolic() && u.iter().all(|&v| model.classify(v) == tag)).then_some(tag)
}

fn has_elliptic(model: &SigmaModel, u: &[f64]) -> bool {
    u.iter().any(|&v| model.classify(v) == PointClass::Elliptic)
}

/// Weights of the three-point derivative at the middle of a nonuniform stencil.
fn centered_weights(t0: f64, t1: f64, t2: f64) -> [f64; 3] {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    [
        -h2 / (h1 * (h1 + h2)),
        (h2 - h1) / (h1 * h2),
        h1 / (h2 * (h1 + h2)),
    ]
}

/// Max-norm residuals `(‖u_t + v_x‖, ‖v_t − (σ(u))_x‖)` at an interior frame.
pub fn residual(field: &StateField, index: usize) -> Result<(f64, f64)> {
    if index == 0 || index + 1 >= field.len() {
        return Err(Error::InsufficientFrames {
            index,
            len: field.len(),
        });
    }
    let (a, b, c) = (field.frame(index - 1), field.frame(index), field.frame(index + 1));
    let w = centered_weights(a.t, b.t, c.t);
    let n = field.n_x();
    let mut sp = Spectral::new(n);
    let vx = sp.derivative_vec(&b.v_periodic);
    let sig: Vec<f64> = b.u.iter().map(|&u| field.model().sigma(u)).collect();
    let sx = sp.derivative_vec(&sig);
    let mut res_u = 0.0_f64;
    let mut res_v = 0.0_f64;
    for j in 0..n {
        let ut = w[0] * a.u[j] + w[1] * b.u[j] + w[2] * c.u[j];
        let vt = w[0] * a.v_periodic[j] + w[1] * b.v_periodic[j] + w[2] * c.v_periodic[j];
        res_u = res_u.max((ut + vx[j] + field.winding_c()).abs());
        res_v = res_v.max((vt - sx[j]).abs());
    }
    Ok((res_u, res_v))
}

/// First frame time at which the solution is no longer inside the hyperbolic
/// component it started in.
pub fn first_nonhyperbolic(field: &StateField) -> Result<Option<f64>> {
    let first = field.frames().first().ok_or(Error::InitialNotHyperbolic)?;
    let tag = hyperbolic_tag(field.model(), &first.u).ok_or(Error::InitialNotHyperbolic)?;
    Ok(field
        .frames()
        .iter()
        .find(|f| f.u.iter().any(|&u| field.model().classify(u) != tag))
        .map(|f| f.t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalExtremes {
    pub class: PointClass,
    pub start: usize,
    pub len: usize,
    pub r1x_min: f64,
    pub r1x_max: f64,
    pub r2x_min: f64,
    pub r2x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub t: f64,
    pub intervals: Vec<IntervalExtremes>,
}

/// Per interval of hyperbolicity, the range of `(r1)_x` and `(r2)_x`
/// (with `r1 = v − q`, `r2 = v + q`).
pub fn monotone_invariant_check(field: &StateField, index: usize) -> MonotoneReport {
    let frame = field.frame(index);
    let model = field.model();
    let mut sp = Spectral::new(field.n_x());
    let ux = sp.derivative_vec(&frame.u);
    let vx: Vec<f64> = sp
        .derivative_vec(&frame.v_periodic)
        .into_iter()
        .map(|d| d + field.winding_c())
        .collect();
    let mask = field.region_mask(index);
    let n = field.n_x();
    let intervals = mask
        .hyperbolic_runs()
        .map(|run| {
            let side = run.class.side().expect("hyperbolic run");
            let qt = QTransform::new(model.clone(), side);
            let mut e = IntervalExtremes {
                class: run.class,
                start: run.start,
                len: run.len,
                r1x_min: f64::INFINITY,
                r1x_max: f64::NEG_INFINITY,
                r2x_min: f64::INFINITY,
                r2x_max: f64::NEG_INFINITY,
            };
            for j in run.indices(n) {
                let qp = qt.q_prime(frame.u[j]);
                let r1x = vx[j] - qp * ux[j];
                let r2x = vx[j] + qp * ux[j];
                e.r1x_min = e.r1x_min.min(r1x);
                e.r1x_max = e.r1x_max.max(r1x);
                e.r2x_min = e.r2x_min.min(r2x);
                e.r2x_max = e.r2x_max.max(r2x);
            }
            e
        })
        .collect();
    MonotoneReport {
        t: frame.t,
        intervals,
    }
}

/// Named families of smooth initial data on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Constant {
        u: f64,
        #[serde(default)]
        v: f64,
    },
    /// `u = base + amplitude·sin(2π·mode·x + phase)`,
    /// `v_p = v_amplitude·sin(2π·v_mode·x + v_phase)`.
    Sine {
        base: f64,
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        v_amplitude: f64,
        #[serde(default = "one")]
        v_mode: u32,
        #[serde(default)]
        v_phase: f64,
    },
    /// Sine profile for `u` with `v` chosen so the invariant of the other
    /// family is constant: a simple wave of `family`.
    SimpleWave {
        base: f64,
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
        #[serde(default)]
        phase: f64,
        family: Family,
    },
    Samples {
        u: Vec<f64>,
        v_periodic: Vec<f64>,
    },
}

fn one() -> u32 {
    1
}

impl InitialData {
    pub fn frame(&self, model: &SigmaModel, n_x: usize, t0: f64) -> Result<Frame> {
        let x = |j: usize| j as f64 / n_x as f64;
        let wave = |a: f64, m: u32, p: f64, j: usize| a * (2.0 * PI * m as f64 * x(j) + p).sin();
        let (u, v_periodic): (Vec<f64>, Vec<f64>) = match self {
            InitialData::Constant { u, v } => (vec![*u; n_x], vec![*v; n_x]),
            InitialData::Sine {
                base,
                amplitude,
                mode,
                phase,
                v_amplitude,
                v_mode,
                v_phase,
            } => (0..n_x)
                .map(|j| {
                    (
                        base + wave(*amplitude, *mode, *phase, j),
                        wave(*v_amplitude, *v_mode, *v_phase, j),
                    )
                })
                .unzip(),
            InitialData::SimpleWave {
                base,
                amplitude,
                mode,
                phase,
                family,
            } => {
                let u: Vec<f64> = (0..n_x).map(|j| base + wave(*amplitude, *mode, *phase, j)).collect();
                let side = model
                    .classify(*base)
                    .side()
                    .ok_or_else(|| Error::InvalidInput(format!("simple wave base {base} is not hyperbolic")))?;
                let qt = QTransform::new(model.clone(), side);
                let v = u
                    .iter()
                    .map(|&ui| qt.family_invariant(family.other(), ui, 0.0).map(|r| -r))
                    .collect::<Result<Vec<f64>>>()?;
                (u, v)
            }
            InitialData::Samples { u, v_periodic } => {
                if u.len() != n_x || v_periodic.len() != n_x {
                    return Err(Error::InvalidInput(format!(
                        "sampled initial data has {} / {} points, grid has {n_x}",
                        u.len(),
                        v_periodic.len()
                    )));
                }
                (u.clone(), v_periodic.clone())
            }
        };
        Ok(Frame { t: t0, u, v_periodic })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{make_cubic, make_quadratic};

    #[test]
    fn constant_data_is_preserved_exactly() {
        let m = make_quadratic();
        let f0 = InitialData::Constant { u: -4.0, v: 1.5 }.frame(&m, 32, 0.0).unwrap();
        let opts = SolverOptions {
            filter: true,
            ..Default::default()
        };
        let mut s = Solver::new(m, 32, 0.0, opts);
        let f1 = s.advance(&f0, 0.01).unwrap();
        assert!(f1.u.iter().all(|&u| (u + 4.0).abs() < 1e-14));
        assert!(f1.v_periodic.iter().all(|&v| (v - 1.5).abs() < 1e-14));
    }

    #[test]
    fn exact_family_steps_are_exact() {
        let m = make_cubic();
        let c = 2.0;
        let mut field = StateField::new(m, 64, c).unwrap();
        field
            .push(InitialData::Constant { u: -3.0, v: 0.0 }.frame(field.model(), 64, 0.0).unwrap())
            .unwrap();
        for _ in 0..10 {
            step(&mut field, 0.05, &SolverOptions::default()).unwrap();
        }
        let last = field.last().unwrap();
        assert!((last.t - 0.5).abs() < 1e-14);
        for &u in &last.u {
            assert!((u - (-3.0 - c * 0.5)).abs() < 1e-10);
        }
        assert!(last.v_periodic.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn residual_of_static_non_solution() {
        let m = make_quadratic();
        let field = StateField::from_fn(m, 256, 0.0, &[0.0, 0.1, 0.2], |_, x| ((2.0 * PI * x).sin(), 0.0)).unwrap();
        let (ru, rv) = residual(&field, 1).unwrap();
        assert!(ru < 1e-12);
        assert!((rv - PI).abs() < 1e-9, "{rv}");
        assert!(matches!(residual(&field, 0), Err(Error::InsufficientFrames { .. })));
        assert!(matches!(residual(&field, 2), Err(Error::InsufficientFrames { .. })));
    }

    #[test]
    fn first_nonhyperbolic_crossing() {
        let m = make_quadratic();
        let times: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
        let field = StateField::from_fn(m.clone(), 16, 0.0, &times, |t, _| (t - 2.0, 0.0)).unwrap();
        let tp = first_nonhyperbolic(&field).unwrap().unwrap();
        assert!((tp - 2.0).abs() <= 0.1 + 1e-12);

        let constant = StateField::from_fn(m.clone(), 16, 0.0, &times, |_, _| (-4.0, 0.0)).unwrap();
        assert_eq!(first_nonhyperbolic(&constant).unwrap(), None);

        let straddle = StateField::from_fn(m, 16, 0.0, &times, |_, x| ((2.0 * PI * x).sin(), 0.0)).unwrap();
        assert!(matches!(first_nonhyperbolic(&straddle), Err(Error::InitialNotHyperbolic)));
    }

    #[test]
    fn monotone_check_on_exact_family() {
        let m = make_quadratic();
        let c = 1.5;
        let field = StateField::from_fn(m, 32, c, &[1.0], |t, _| (-c * t, 0.0)).unwrap();
        let rep = monotone_invariant_check(&field, 0);
        assert_eq!(rep.intervals.len(), 1);
        let e = &rep.intervals[0];
        for v in [e.r1x_min, e.r1x_max, e.r2x_min, e.r2x_max] {
            assert!((v - c).abs() < 1e-12);
        }
    }

    #[test]
    fn straddling_data_stops_immediately() {
        let m = make_quadratic();
        let init = InitialData::Sine {
            base: 0.0,
            amplitude: 0.5,
            mode: 1,
            phase: 0.0,
            v_amplitude: 0.0,
            v_mode: 1,
            v_phase: 0.0,
        }
        .frame(&m, 32, 0.0)
        .unwrap();
        let (field, rep) = run(&m, init, 0.0, &RunSettings::default()).unwrap();
        assert_eq!(rep.stop, StopReason::EllipticOnset);
        assert_eq!(rep.t_prime, Some(0.0));
        assert_eq!(field.len(), 1);
    }

    #[test]
    fn constant_run_hits_time_limit() {
        let m = make_quadratic();
        let init = InitialData::Constant { u: -1.0, v: 0.0 }.frame(&m, 32, 0.0).unwrap();
        let settings = RunSettings {
            t_max: 10.0,
            ..Default::default()
        };
        let (field, rep) = run(&m, init, 0.0, &settings).unwrap();
        assert_eq!(rep.stop, StopReason::TimeLimit);
        assert!((field.last().unwrap().t - 10.0).abs() < 1e-12);
        assert_eq!(rep.t_prime, None);
    }

    #[test]
    fn simple_wave_keeps_other_invariant_flat() {
        let m = make_cubic();
        let f = InitialData::SimpleWave {
            base: 2.0,
            amplitude: 0.2,
            mode: 1,
            phase: 0.0,
            family: Family::First,
        }
        .frame(&m, 64, 0.0)
        .unwrap();
        let qt = QTransform::new(m, crate::riemann::Side::Beta);
        for j in 0..64 {
            let r = qt.family_invariant(Family::Second, f.u[j], f.v_periodic[j]).unwrap();
            assert!(r.abs() < 1e-12);
        }
    }
}
