//! Sampled solution fields on the periodic circle and their interpolation.

use serde::{Deserialize, Serialize};

use crate::constitutive::{PointClass, SigmaModel, EPS_PAR};
use crate::error::{Error, Result};

/// One stored time level: `u` and the periodic part of `v` on `x_j = j/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub u: Vec<f64>,
    pub v_periodic: Vec<f64>,
}

/// Interpolated state at a point `(t, x)`; `v` and `v_x` include the winding term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub u: f64,
    pub u_x: f64,
    pub v: f64,
    pub v_x: f64,
}

/// A solution of the p-system sampled on a uniform periodic grid at increasing times.
///
/// `v(t, x) = v_periodic(t, x) + C·x` with `C` the winding constant, so
/// `v(t, x + 1) = v(t, x) + C` holds exactly.
#[derive(Debug, Clone)]
pub struct StateField {
    model: SigmaModel,
    n_x: usize,
    winding_c: f64,
    frames: Vec<Frame>,
}

impl StateField {
    pub fn new(model: SigmaModel, n_x: usize, winding_c: f64) -> Result<Self> {
        if n_x < 8 {
            return Err(Error::InvalidInput(format!("n_x must be at least 8 (got {n_x})")));
        }
        Ok(StateField {
            model,
            n_x,
            winding_c,
            frames: Vec::new(),
        })
    }

    /// Builds a field by sampling `f(t, x) -> (u, v_periodic)` at the given times.
    pub fn from_fn<F>(model: SigmaModel, n_x: usize, winding_c: f64, times: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> (f64, f64),
    {
        let mut field = StateField::new(model, n_x, winding_c)?;
        for &t in times {
            let (u, v_periodic) = (0..n_x)
                .map(|j| f(t, j as f64 / n_x as f64))
                .unzip();
            field.push(Frame { t, u, v_periodic })?;
        }
        Ok(field)
    }

    pub fn push(&mut self, frame: Frame) -> Result<()> {
        if frame.u.len() != self.n_x || frame.v_periodic.len() != self.n_x {
            return Err(Error::InvalidInput(format!(
                "frame at t = {} has {} / {} samples, expected {}",
                frame.t,
                frame.u.len(),
                frame.v_periodic.len(),
                self.n_x
            )));
        }
        if let Some(last) = self.frames.last() {
            if !(frame.t > last.t) {
                return Err(Error::InvalidInput(format!(
                    "frame times must increase ({} after {})",
                    frame.t, last.t
                )));
            }
        }
        self.frames.push(frame);
        Ok(())
    }

    pub fn model(&self) -> &SigmaModel {
        &self.model
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    pub fn winding_c(&self) -> f64 {
        self.winding_c
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &Frame {
        &self.frames[i]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn last(&self) -> Option<&Frame> {
        self.frames.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn t_span(&self) -> Option<(f64, f64)> {
        Some((self.frames.first()?.t, self.frames.last()?.t))
    }

    /// Smallest spacing between consecutive frames.
    pub fn min_frame_spacing(&self) -> f64 {
        self.frames
            .windows(2)
            .map(|w| w[1].t - w[0].t)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest characteristic speed scale `√|σ′|` over all stored samples.
    pub fn max_speed(&self) -> f64 {
        self.frames
            .iter()
            .flat_map(|f| f.u.iter())
            .map(|&u| self.model.speed_scale(u))
            .fold(0.0, f64::max)
    }

    /// Full `v` at grid point `j` of frame `i`.
    pub fn v_full(&self, i: usize, j: usize) -> f64 {
        self.frames[i].v_periodic[j] + self.winding_c * j as f64 / self.n_x as f64
    }

    /// Locates `t`: `(i, w)` with `t = (1 − w)·t_i + w·t_{i+1}`.
    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let n = self.frames.len();
        let (t0, t1) = self.t_span()?;
        if !(t >= t0 && t <= t1) {
            return None;
        }
        if n == 1 {
            return Some((0, 0.0));
        }
        let k = self.frames.partition_point(|f| f.t <= t);
        let i = k.saturating_sub(1).min(n - 2);
        let (a, b) = (self.frames[i].t, self.frames[i + 1].t);
        Some((i, ((t - a) / (b - a)).clamp(0.0, 1.0)))
    }

    /// Interpolated state at `(t, x)` with `x` unwrapped; `None` outside the time span.
    ///
    /// Periodic cubic Hermite in `x` (slopes from fourth-order centred differences),
    /// linear in `t` between stored frames.
    pub fn sample(&self, t: f64, x: f64) -> Option<PointSample> {
        let (i, w) = self.locate(t)?;
        let a = &self.frames[i];
        let (ua, uxa) = hermite(&a.u, x);
        let (va, vxa) = hermite(&a.v_periodic, x);
        let (u, u_x, vp, vp_x) = if w == 0.0 || self.frames.len() == 1 {
            (ua, uxa, va, vxa)
        } else {
            let b = &self.frames[i + 1];
            let (ub, uxb) = hermite(&b.u, x);
            let (vb, vxb) = hermite(&b.v_periodic, x);
            let l = |p: f64, q: f64| (1.0 - w) * p + w * q;
            (l(ua, ub), l(uxa, uxb), l(va, vb), l(vxa, vxb))
        };
        Some(PointSample {
            u,
            u_x,
            v: vp + self.winding_c * x,
            v_x: vp_x + self.winding_c,
        })
    }

    pub fn region_mask(&self, i: usize) -> RegionMask {
        RegionMask::new(&self.model, &self.frames[i].u, EPS_PAR)
    }
}

/// Cubic Hermite interpolant of periodic samples and its derivative at `x`.
pub fn hermite(f: &[f64], x: f64) -> (f64, f64) {
    let n = f.len();
    let nf = n as f64;
    let dx = 1.0 / nf;
    let xs = (x - x.floor()) * nf;
    let j = (xs.floor() as usize).min(n - 1);
    let s = xs - j as f64;
    let at = |k: isize| f[(j as isize + k).rem_euclid(n as isize) as usize];
    let slope = |c: isize| {
        (at(c - 2) - 8.0 * at(c - 1) + 8.0 * at(c + 1) - at(c + 2)) / (12.0 * dx)
    };
    let (f0, f1) = (at(0), at(1));
    let (m0, m1) = (slope(0) * dx, slope(1) * dx);
    let s2 = s * s;
    let s3 = s2 * s;
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * f0
        + (s3 - 2.0 * s2 + s) * m0
        + (-2.0 * s3 + 3.0 * s2) * f1
        + (s3 - s2) * m1;
    let deriv = (6.0 * s2 - 6.0 * s) * f0
        + (3.0 * s2 - 4.0 * s + 1.0) * m0
        + (-6.0 * s2 + 6.0 * s) * f1
        + (3.0 * s2 - 2.0 * s) * m1;
    (value, deriv / dx)
}

/// A maximal circular run of grid points sharing one [`PointClass`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub class: PointClass,
    /// First grid index of the run.
    pub start: usize,
    pub len: usize,
}

impl Run {
    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |k| (self.start + k) % n)
    }
}

/// Per-point region tags of one frame and their connected components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMask {
    pub classes: Vec<PointClass>,
    /// Component label of each grid point (index into `runs`).
    pub labels: Vec<usize>,
    pub runs: Vec<Run>,
    /// Indices `j` where points `j` and `j + 1` carry different non-boundary tags,
    /// i.e. the boundary was crossed between grid points.
    pub crossings: Vec<usize>,
}

impl RegionMask {
    pub fn new(model: &SigmaModel, u: &[f64], eps: f64) -> Self {
        let n = u.len();
        let classes: Vec<PointClass> = u.iter().map(|&v| model.classify_with(v, eps)).collect();
        let crossings = (0..n)
            .filter(|&j| {
                let (a, b) = (classes[j], classes[(j + 1) % n]);
                a != b && a != PointClass::Boundary && b != PointClass::Boundary
            })
            .collect();

        // Start the circular sweep at a class change so no run wraps unseen.
        let start = (0..n)
            .find(|&j| classes[j] != classes[(j + n - 1) % n])
            .unwrap_or(0);
        let mut runs: Vec<Run> = Vec::new();
        let mut labels = vec![0; n];
        for k in 0..n {
            let j = (start + k) % n;
            match runs.last_mut() {
                Some(r) if r.class == classes[j] => r.len += 1,
                _ => runs.push(Run {
                    class: classes[j],
                    start: j,
                    len: 1,
                }),
            }
            labels[j] = runs.len() - 1;
        }
        RegionMask {
            classes,
            labels,
            runs,
            crossings,
        }
    }

    /// The single class of the frame if it is uniform.
    pub fn uniform(&self) -> Option<PointClass> {
        (self.runs.len() == 1).then(|| self.runs[0].class)
    }

    /// Runs of one hyperbolic tag: the intervals of hyperbolicity.
    pub fn hyperbolic_runs(&self) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(|r| r.class.is_hyperbolic())
    }
}
