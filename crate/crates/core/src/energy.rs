//! The functional `E(t) = ∫ f(u) dx` on elliptic-band solutions and the
//! identity `Ë = ∫ f″(u) (v_x² + σ′(u) u_x²) dx`.
//!
//! With `f` vanishing at α and β, positive between and concave, `E` is
//! positive and concave on any solution staying in `[α, β]`.

use serde::{Deserialize, Serialize};

use crate::constitutive::{ScalarFn, SigmaModel, EPS_PAR};
use crate::error::{Error, Result};
use crate::field::StateField;
use crate::spectral::Spectral;

pub const TOL_CONC: f64 = 1e-10;

/// `max(CROSS_ABS, CROSS_REL·|Ë_fd|)`.
pub const CROSS_ABS: f64 = 1e-4;
pub const CROSS_REL: f64 = 1e-2;

#[derive(Clone)]
pub struct WeightFunction {
    alpha: f64,
    beta: f64,
    f: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightFunction")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

impl WeightFunction {
    /// Builds a weight and checks `f(α) = f(β) = 0`, `f > 0` inside and
    /// `f″ < 0` on `[α, β]` at `samples` points.
    pub fn new(alpha: f64, beta: f64, f: ScalarFn, d1: ScalarFn, d2: ScalarFn, samples: usize) -> Result<Self> {
        if !(alpha < beta) {
            return Err(Error::DegenerateInterval { alpha, beta });
        }
        let w = WeightFunction { alpha, beta, f, d1, d2 };
        w.validate(samples)?;
        Ok(w)
    }

    pub fn validate(&self, samples: usize) -> Result<()> {
        let scale = (self.beta - self.alpha).powi(2);
        if (self.f)(self.alpha).abs() > 1e-12 * scale || (self.f)(self.beta).abs() > 1e-12 * scale {
            return Err(Error::InvalidModel("weight must vanish at alpha and beta".into()));
        }
        let n = samples.max(2);
        for i in 0..=n {
            let u = self.alpha + (self.beta - self.alpha) * i as f64 / n as f64;
            if (self.d2)(u) >= 0.0 {
                return Err(Error::InvalidModel(format!("weight is not concave at u = {u}")));
            }
            if i > 0 && i < n && (self.f)(u) <= 0.0 {
                return Err(Error::InvalidModel(format!("weight is not positive at u = {u}")));
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn d1(&self, u: f64) -> f64 {
        (self.d1)(u)
    }

    pub fn d2(&self, u: f64) -> f64 {
        (self.d2)(u)
    }
}

/// `f(u) = (u − α)(β − u)`, so `f″ ≡ −2`.
pub fn default_weight(model: &SigmaModel) -> Result<WeightFunction> {
    let (a, b) = (model.alpha(), model.beta());
    if !(a < b) {
        return Err(Error::DegenerateInterval { alpha: a, beta: b });
    }
    WeightFunction::new(
        a,
        b,
        std::sync::Arc::new(move |u| (u - a) * (b - u)),
        std::sync::Arc::new(move |u| a + b - 2.0 * u),
        std::sync::Arc::new(|_| -2.0),
        64,
    )
}

fn check_band(field: &StateField, index: usize, w: &WeightFunction) -> Result<()> {
    let points: Vec<usize> = field
        .frame(index)
        .u
        .iter()
        .enumerate()
        .filter(|(_, &u)| u < w.alpha - EPS_PAR || u > w.beta + EPS_PAR)
        .map(|(j, _)| j)
        .collect();
    if points.is_empty() {
        Ok(())
    } else {
        Err(Error::OutsideEllipticBand { frame: index, points })
    }
}

/// Trapezoid rule on the collocation grid (spectrally accurate for periodic integrands).
pub fn energy(field: &StateField, index: usize, w: &WeightFunction) -> Result<f64> {
    check_band(field, index, w)?;
    let u = &field.frame(index).u;
    Ok(u.iter().map(|&u| w.f(u)).sum::<f64>() / u.len() as f64)
}

/// `∫ f″(u)(v_x² + σ′(u) u_x²) dx` with collocation derivatives; `v_x` includes `C`.
pub fn energy_ddot(field: &StateField, index: usize, w: &WeightFunction) -> Result<f64> {
    let mut sp = Spectral::new(field.n_x());
    energy_ddot_with(field, index, w, &mut sp)
}

fn energy_ddot_with(field: &StateField, index: usize, w: &WeightFunction, sp: &mut Spectral) -> Result<f64> {
    check_band(field, index, w)?;
    let frame = field.frame(index);
    let ux = sp.derivative_vec(&frame.u);
    let vx = sp.derivative_vec(&frame.v_periodic);
    let c = field.winding_c();
    let m = field.model();
    let sum: f64 = frame
        .u
        .iter()
        .zip(ux.iter().zip(&vx))
        .map(|(&u, (&ux, &vx))| {
            let vx = vx + c;
            w.d2(u) * (vx * vx + m.d1(u) * ux * ux)
        })
        .sum();
    Ok(sum / frame.u.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub e_values: Vec<f64>,
    pub e_ddot_integral: Vec<f64>,
    /// Three-point second difference of `E`; absent at the first and last frame.
    pub e_ddot_fd: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub trace: EnergyTrace,
    pub verdict: Verdict,
    pub max_e_ddot: f64,
    /// Largest `|Ë_identity − Ë_fd| / cross_tol` over interior frames.
    pub worst_cross_ratio: f64,
    pub concavity_violations: Vec<usize>,
    pub cross_violations: Vec<usize>,
}

/// Second derivative at the middle of three (possibly unevenly spaced) samples.
fn second_difference(t: [f64; 3], e: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    2.0 * (h1 * e[2] - (h1 + h2) * e[1] + h2 * e[0]) / (h1 * h2 * (h1 + h2))
}

pub fn cross_tolerance(e_ddot_fd: f64) -> f64 {
    CROSS_ABS.max(CROSS_REL * e_ddot_fd.abs())
}

/// Energy trace over all frames with both `Ë` estimates and a PASS/FAIL verdict.
pub fn concavity_monitor(field: &StateField, w: &WeightFunction) -> Result<ConcavityReport> {
    let mut sp = Spectral::new(field.n_x());
    let n = field.len();
    let mut trace = EnergyTrace {
        times: field.times(),
        e_values: Vec::with_capacity(n),
        e_ddot_integral: Vec::with_capacity(n),
        e_ddot_fd: vec![None; n],
    };
    for i in 0..n {
        trace.e_values.push(energy(field, i, w)?);
        trace.e_ddot_integral.push(energy_ddot_with(field, i, w, &mut sp)?);
    }
    let mut cross_violations = Vec::new();
    let mut worst = 0.0f64;
    for i in 1..n.saturating_sub(1) {
        let t = [trace.times[i - 1], trace.times[i], trace.times[i + 1]];
        let e = [trace.e_values[i - 1], trace.e_values[i], trace.e_values[i + 1]];
        let fd = second_difference(t, e);
        trace.e_ddot_fd[i] = Some(fd);
        let ratio = (trace.e_ddot_integral[i] - fd).abs() / cross_tolerance(fd);
        worst = worst.max(ratio);
        if ratio > 1.0 {
            cross_violations.push(i);
        }
    }
    let concavity_violations: Vec<usize> = (0..n).filter(|&i| trace.e_ddot_integral[i] > TOL_CONC).collect();
    let max_e_ddot = trace.e_ddot_integral.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let verdict = if concavity_violations.is_empty() && cross_violations.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConcavityReport {
        trace,
        verdict,
        max_e_ddot,
        worst_cross_ratio: worst,
        concavity_violations,
        cross_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{make_cubic, make_quadratic};
    use std::f64::consts::PI;

    fn single(u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64, n: usize) -> StateField {
        StateField::from_fn(make_cubic(), n, 0.0, &[0.0], |_, x| (u(x), v(x))).unwrap()
    }

    #[test]
    fn default_weight_examples() {
        let w = default_weight(&make_cubic()).unwrap();
        assert_eq!(w.f(0.0), 1.0);
        assert_eq!(w.f(1.0), 0.0);
        assert_eq!(w.f(-1.0), 0.0);
        assert_eq!(w.d2(0.3), -2.0);
        assert!(matches!(
            default_weight(&make_quadratic()),
            Err(Error::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn energy_examples() {
        let w = default_weight(&make_cubic()).unwrap();
        assert!((energy(&single(|_| 0.0, |_| 0.0, 16), 0, &w).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(energy(&single(|_| -1.0, |_| 0.0, 16), 0, &w).unwrap(), 0.0);
        let f = single(|x| 0.5 * (2.0 * PI * x).sin(), |_| 0.0, 64);
        assert!((energy(&f, 0, &w).unwrap() - 0.875).abs() < 1e-14);
        let out = single(|x| 1.5 * (2.0 * PI * x).sin(), |_| 0.0, 64);
        assert!(matches!(energy(&out, 0, &w), Err(Error::OutsideEllipticBand { .. })));
    }

    #[test]
    fn energy_ddot_examples() {
        let w = default_weight(&make_cubic()).unwrap();
        assert_eq!(energy_ddot(&single(|_| 0.2, |_| 0.7, 16), 0, &w).unwrap(), 0.0);
        let f = single(|_| 0.0, |x| (2.0 * PI * x).sin() / (2.0 * PI), 64);
        assert!((energy_ddot(&f, 0, &w).unwrap() + 1.0).abs() < 1e-13);
        let f = single(|x| 0.5 * (2.0 * PI * x).sin(), |_| 0.0, 64);
        assert!(energy_ddot(&f, 0, &w).unwrap() < 0.0);
    }

    #[test]
    fn winding_enters_v_x() {
        // v = 0.5x: Ë = -2·0.25
        let w = default_weight(&make_cubic()).unwrap();
        let f = StateField::from_fn(make_cubic(), 16, 0.5, &[0.0], |_, _| (0.0, 0.0)).unwrap();
        assert!((energy_ddot(&f, 0, &w).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn second_difference_is_exact_on_quadratics() {
        let e = |t: f64| 3.0 * t * t - t + 2.0;
        let t = [0.1, 0.25, 0.7];
        assert!((second_difference(t, t.map(e)) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn constant_field_passes() {
        let w = default_weight(&make_cubic()).unwrap();
        let times: Vec<f64> = (0..10).map(|k| 0.1 * k as f64).collect();
        let f = StateField::from_fn(make_cubic(), 32, 0.0, &times, |_, _| (0.3, -0.2)).unwrap();
        let r = concavity_monitor(&f, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.trace.e_values.windows(2).all(|p| p[0] == p[1]));
    }
}
