//! Trigonometric collocation on the unit circle `x_j = j/n`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Modes above this fraction of the Nyquist wavenumber form the "tail".
pub const TAIL_START: f64 = 2.0 / 3.0;

/// Amplitude floor (relative to `max(1, |mean|)`) below which a field counts as flat
/// and its tail fraction is reported as ~0 instead of roundoff noise.
const FLAT_FLOOR: f64 = 1e-8;

pub struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Clone for Spectral {
    fn clone(&self) -> Self {
        Spectral::new(self.n)
    }
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        assert!(n >= 4, "collocation grid needs at least 4 points");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Spectral {
            n,
            fwd,
            inv,
            buf: vec![Complex::default(); n],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed integer wavenumber of FFT slot `j`.
    fn mode(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    fn is_nyquist(&self, j: usize) -> bool {
        self.n.is_multiple_of(2) && j == self.n / 2
    }

    fn forward(&mut self, data: &[f64]) {
        for (b, &d) in self.buf.iter_mut().zip(data) {
            *b = Complex::new(d, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
    }

    fn inverse_into(&mut self, out: &mut [f64]) {
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re * s;
        }
    }

    /// `∂/∂x` of a periodic sample vector (the Nyquist mode is dropped).
    pub fn derivative(&mut self, data: &[f64], out: &mut [f64]) {
        self.forward(data);
        for j in 0..self.n {
            if self.is_nyquist(j) {
                self.buf[j] = Complex::default();
            } else {
                let k = 2.0 * PI * self.mode(j) as f64;
                self.buf[j] *= Complex::new(0.0, k);
            }
        }
        self.inverse_into(out);
    }

    pub fn derivative_vec(&mut self, data: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.derivative(data, &mut out);
        out
    }

    /// Damping factor of the order-16 exponential filter that leaves the lower
    /// two thirds of the spectrum untouched.
    pub fn filter_factor(&self, j: usize) -> f64 {
        let k_max = (self.n / 2) as f64;
        let eta = self.mode(j).unsigned_abs() as f64 / k_max;
        if eta <= TAIL_START {
            1.0
        } else {
            let s = (eta - TAIL_START) / (1.0 - TAIL_START);
            (-36.0 * s.powi(16)).exp()
        }
    }

    pub fn filter(&mut self, data: &mut [f64]) {
        self.forward(data);
        for j in 0..self.n {
            let f = self.filter_factor(j);
            self.buf[j] *= f;
        }
        self.inverse_into(data);
    }

    /// Share of the non-mean spectral energy carried by the tail modes,
    /// `‖tail‖² / ‖non-mean‖²`, with flat fields mapped to ~0.
    pub fn tail_fraction(&mut self, data: &[f64]) -> f64 {
        self.forward(data);
        let k_max = (self.n / 2) as f64;
        let scale = 1.0 / self.n as f64;
        let mean = self.buf[0].re * scale;
        let mut total = 0.0;
        let mut tail = 0.0;
        for j in 1..self.n {
            let a = self.buf[j].norm_sqr() * scale * scale;
            total += a;
            if self.mode(j).unsigned_abs() as f64 > TAIL_START * k_max {
                tail += a;
            }
        }
        let floor = FLAT_FLOOR * mean.abs().max(1.0);
        tail / (total + floor * floor)
    }

    /// Evaluates the trigonometric interpolant of `data` at an arbitrary `x`.
    pub fn interpolate(&mut self, data: &[f64], x: f64) -> f64 {
        self.forward(data);
        let mut s = 0.0;
        for j in 0..self.n {
            let m = self.mode(j);
            let c = self.buf[j];
            let arg = 2.0 * PI * m as f64 * x;
            if self.is_nyquist(j) {
                // split symmetrically between ±k
                s += c.re * arg.cos();
            } else {
                s += c.re * arg.cos() - c.im * arg.sin();
            }
        }
        s / self.n as f64
    }
}

/// Uniform grid `x_j = j/n`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 / n as f64).collect()
}
