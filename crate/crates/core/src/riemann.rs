//! Riemann invariants on one hyperbolic component.
//!
//! On the α-component (`u < α`) the transform is
//! `q(u) = ∫_u^α √(−σ′(s)) ds`, on the β-component (`u > β`) it is
//! `q(u) = ∫_β^u √(−σ′(s)) ds`. In both cases `q ≥ 0`, `q = 0` at the anchor,
//! and the pair is `r1 = v − q`, `r2 = v + q`, so `r2 − r1 = 2q`.
//!
//! With that convention `r1` is carried by `λ1` on the α-component but by
//! `λ2` on the β-component. Code that needs "the invariant of family i"
//! should go through [`QTransform::family_invariant`] or
//! [`family_gradient`], which pick the right one.

use serde::{Deserialize, Serialize};

use crate::constitutive::{SigmaModel, EPS_PAR};
use crate::error::{Error, Result};
use crate::quadrature;

pub const QUAD_TOL: f64 = 1e-10;
pub const TOL_INV: f64 = 1e-12;

/// Largest distance from the anchor the inverse will search.
const MAX_BRACKET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `u < α`
    Alpha,
    /// `u > β`
    Beta,
}

impl Side {
    /// `+1` on the α-component, `−1` on the β-component: the sign of `q′ · (−1)`.
    pub fn orientation(self) -> f64 {
        match self {
            Side::Alpha => 1.0,
            Side::Beta => -1.0,
        }
    }
}

/// Characteristic family: `First` moves with `λ1 = √(−σ′)`, `Second` with `λ2 = −√(−σ′)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    First,
    Second,
}

impl Family {
    pub fn speed(self, model: &SigmaModel, u: f64) -> f64 {
        let l = (-model.d1(u)).max(0.0).sqrt();
        match self {
            Family::First => l,
            Family::Second => -l,
        }
    }

    pub fn other(self) -> Family {
        match self {
            Family::First => Family::Second,
            Family::Second => Family::First,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannPair {
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone)]
pub struct QTransform {
    model: SigmaModel,
    side: Side,
    anchor: f64,
    quad_tol: f64,
}

impl QTransform {
    pub fn new(model: SigmaModel, side: Side) -> Self {
        let anchor = match side {
            Side::Alpha => model.alpha(),
            Side::Beta => model.beta(),
        };
        QTransform {
            model,
            side,
            anchor,
            quad_tol: QUAD_TOL,
        }
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    pub fn model(&self) -> &SigmaModel {
        &self.model
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// Signed distance of `u` from the anchor into the component, or `WrongSide`.
    fn depth(&self, u: f64) -> Result<f64> {
        let d = match self.side {
            Side::Alpha => self.anchor - u,
            Side::Beta => u - self.anchor,
        };
        if d < 0.0 || !d.is_finite() {
            return Err(Error::WrongSide {
                u,
                anchor: self.anchor,
                side: self.side,
            });
        }
        Ok(d)
    }

    fn point_at_depth(&self, d: f64) -> f64 {
        match self.side {
            Side::Alpha => self.anchor - d,
            Side::Beta => self.anchor + d,
        }
    }

    /// `q` as a function of the depth `d ≥ 0`. Integrates in `w = √(depth)`,
    /// which removes the square-root singularity of `√(−σ′)` at the anchor.
    fn q_of_depth(&self, d: f64) -> Result<f64> {
        if d == 0.0 {
            return Ok(0.0);
        }
        let integrand = |w: f64| {
            let s = self.point_at_depth(w * w);
            2.0 * w * (-self.model.d1(s)).max(0.0).sqrt()
        };
        quadrature::integrate(integrand, 0.0, d.sqrt(), self.quad_tol)
    }

    pub fn q_eval(&self, u: f64) -> Result<f64> {
        let d = self.depth(u)?;
        self.q_of_depth(d)
    }

    /// `q′(u)`: `−√(−σ′)` on the α-component, `+√(−σ′)` on the β-component.
    pub fn q_prime(&self, u: f64) -> f64 {
        -self.side.orientation() * (-self.model.d1(u)).max(0.0).sqrt()
    }

    /// Solves `q(u) = y` on the component.
    pub fn q_inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::OutOfRange { y, max: f64::NAN });
        }
        if y == 0.0 {
            return Ok(self.anchor);
        }
        // Grow the bracket geometrically from the anchor.
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut q_hi = self.q_of_depth(hi)?;
        while q_hi < y {
            lo = hi;
            hi *= 2.0;
            if hi > MAX_BRACKET {
                return Err(Error::OutOfRange { y, max: q_hi });
            }
            q_hi = self.q_of_depth(hi)?;
        }
        // Safeguarded Newton on the depth; dq/dd = √(−σ′).
        let mut d = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.q_of_depth(d)? - y;
            if f.abs() <= TOL_INV * y.max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = d;
            } else {
                lo = d;
            }
            let slope = (-self.model.d1(self.point_at_depth(d))).max(0.0).sqrt();
            let newton = if slope > 0.0 { d - f / slope } else { f64::NAN };
            d = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(self.point_at_depth(d))
    }

    pub fn to_riemann(&self, u: f64, v: f64) -> Result<RiemannPair> {
        let q = self.q_eval(u)?;
        Ok(RiemannPair { r1: v - q, r2: v + q })
    }

    pub fn from_riemann(&self, r: RiemannPair) -> Result<(f64, f64)> {
        let gap = 0.5 * (r.r2 - r.r1);
        if gap < 0.0 {
            return Err(Error::InvalidInput(format!(
                "Riemann pair needs r2 >= r1 (r1 = {}, r2 = {})",
                r.r1, r.r2
            )));
        }
        let u = self.q_inverse(gap)?;
        Ok((u, 0.5 * (r.r1 + r.r2)))
    }

    /// The invariant transported by `family` (see module docs).
    pub fn family_invariant(&self, family: Family, u: f64, v: f64) -> Result<f64> {
        let r = self.to_riemann(u, v)?;
        Ok(match (self.side, family) {
            (Side::Alpha, Family::First) | (Side::Beta, Family::Second) => r.r1,
            (Side::Alpha, Family::Second) | (Side::Beta, Family::First) => r.r2,
        })
    }
}

/// x-derivative of the invariant carried by `family`: `v_x + λ_family(u) u_x`.
pub fn family_gradient(model: &SigmaModel, family: Family, u: f64, u_x: f64, v_x: f64) -> f64 {
    v_x + family.speed(model, u) * u_x
}

/// `(λ1)_{r1} = (λ2)_{r2} = σ″/(4σ′)`.
pub fn genuine_nonlinearity(model: &SigmaModel, u: f64) -> Result<f64> {
    let (_, s1, s2) = model.eval(u);
    if s1 >= -EPS_PAR {
        return Err(Error::BoundaryDegeneracy { u });
    }
    Ok(s2 / (4.0 * s1))
}
