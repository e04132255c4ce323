//! Constitutive laws `σ(u)` and the pointwise elliptic/hyperbolic split.
//!
//! Two families are built in: the convex quadratic `σ = (u − s)²/2` (type I,
//! one transition point) and the cubic `σ = (u − c) − (u − c)³/(3w²)` (type II,
//! hyperbolic outside `[c − w, c + w]`, elliptic inside). Anything else can be
//! supplied as three callables through [`SigmaModel::custom`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riemann::Side;

/// Half-width of the band `|σ′(u)| ≤ EPS_PAR` treated as the hyperbolic boundary.
pub const EPS_PAR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Strictly convex with a single minimum at `α = β`.
    TypeI,
    /// Cubic-like: decreasing, increasing on `(α, β)`, decreasing again.
    TypeII,
    Custom,
}

/// Pointwise type of the system at a value of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    HyperbolicAlpha,
    HyperbolicBeta,
    Elliptic,
    Boundary,
}

impl PointClass {
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, PointClass::HyperbolicAlpha | PointClass::HyperbolicBeta)
    }

    /// Hyperbolic component the point belongs to, if any.
    pub fn side(self) -> Option<Side> {
        match self {
            PointClass::HyperbolicAlpha => Some(Side::Alpha),
            PointClass::HyperbolicBeta => Some(Side::Beta),
            _ => None,
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Law {
    Quadratic { shift: f64 },
    Cubic { center: f64, half_width: f64 },
    Custom { sigma: ScalarFn, d1: ScalarFn, d2: ScalarFn },
}

/// An immutable constitutive law with its transition points.
#[derive(Clone)]
pub struct SigmaModel {
    name: String,
    kind: ModelKind,
    alpha: f64,
    beta: f64,
    law: Law,
}

impl fmt::Debug for SigmaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigmaModel")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .finish()
    }
}

/// `σ(u) = u²/2`, the dispersionless Boussinesq case.
pub fn make_quadratic() -> SigmaModel {
    SigmaModel::quadratic(0.0)
}

/// `σ(u) = u − u³/3` with `α = −1`, `β = 1`.
pub fn make_cubic() -> SigmaModel {
    SigmaModel::cubic(0.0, 1.0).expect("unit half-width is valid")
}

impl SigmaModel {
    /// `σ(u) = (u − shift)²/2`; type I with `α = β = shift`.
    pub fn quadratic(shift: f64) -> Self {
        SigmaModel {
            name: "quadratic".into(),
            kind: ModelKind::TypeI,
            alpha: shift,
            beta: shift,
            law: Law::Quadratic { shift },
        }
    }

    /// `σ(u) = (u − c) − (u − c)³/(3w²)`; type II with `α = c − w`, `β = c + w`.
    pub fn cubic(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "cubic half-width must be positive and finite (got {half_width})"
            )));
        }
        Ok(SigmaModel {
            name: "cubic".into(),
            kind: ModelKind::TypeII,
            alpha: center - half_width,
            beta: center + half_width,
            law: Law::Cubic { center, half_width },
        })
    }

    /// A user-supplied law. The transition points are declared, not derived;
    /// use [`SigmaModel::validate`] to check them by sampling.
    pub fn custom(
        name: impl Into<String>,
        alpha: f64,
        beta: f64,
        sigma: ScalarFn,
        d1: ScalarFn,
        d2: ScalarFn,
    ) -> Result<Self> {
        if !(alpha <= beta) {
            return Err(Error::InvalidModel(format!(
                "alpha must not exceed beta (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(SigmaModel {
            name: name.into(),
            kind: ModelKind::Custom,
            alpha,
            beta,
            law: Law::Custom { sigma, d1, d2 },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(σ(u), σ′(u), σ″(u))`.
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        match &self.law {
            Law::Quadratic { shift } => {
                let w = u - shift;
                (0.5 * w * w, w, 1.0)
            }
            Law::Cubic { center, half_width } => {
                let w = u - center;
                let h2 = half_width * half_width;
                (w - w * w * w / (3.0 * h2), 1.0 - w * w / h2, -2.0 * w / h2)
            }
            Law::Custom { sigma, d1, d2 } => (sigma(u), d1(u), d2(u)),
        }
    }

    pub fn sigma(&self, u: f64) -> f64 {
        self.eval(u).0
    }

    pub fn d1(&self, u: f64) -> f64 {
        match &self.law {
            Law::Custom { d1, .. } => d1(u),
            _ => self.eval(u).1,
        }
    }

    pub fn d2(&self, u: f64) -> f64 {
        match &self.law {
            Law::Custom { d2, .. } => d2(u),
            _ => self.eval(u).2,
        }
    }

    /// `(λ1, λ2) = (√(−σ′), −√(−σ′))`, or `None` where `σ′ > EPS_PAR`.
    pub fn eigenvalues(&self, u: f64) -> Option<(f64, f64)> {
        let s1 = self.d1(u);
        if s1 > EPS_PAR {
            return None;
        }
        let l = (-s1).max(0.0).sqrt();
        Some((l, -l))
    }

    /// Characteristic speed scale `√|σ′(u)|`, also meaningful in elliptic zones
    /// where it bounds the growth rate of the linearised operator.
    pub fn speed_scale(&self, u: f64) -> f64 {
        self.d1(u).abs().sqrt()
    }

    pub fn classify(&self, u: f64) -> PointClass {
        self.classify_with(u, EPS_PAR)
    }

    /// Classification with an explicit boundary band `|σ′(u)| ≤ eps`.
    ///
    /// The region is decided by the sign of `σ′`; `α`/`β` only pick the
    /// hyperbolic component. For a type I law (`α = β`) this leaves `u > α`
    /// elliptic, as it should be.
    pub fn classify_with(&self, u: f64, eps: f64) -> PointClass {
        let s1 = self.d1(u);
        if s1.abs() <= eps {
            PointClass::Boundary
        } else if s1 > 0.0 {
            PointClass::Elliptic
        } else if u < self.alpha {
            PointClass::HyperbolicAlpha
        } else if u > self.beta {
            PointClass::HyperbolicBeta
        } else if u <= 0.5 * (self.alpha + self.beta) {
            // σ′ < 0 strictly inside [α, β] only happens for an ill-declared custom law.
            PointClass::HyperbolicAlpha
        } else {
            PointClass::HyperbolicBeta
        }
    }

    /// Checks the declared sign pattern on `samples` points of `[α − 5, β + 5]`.
    /// Points inside the boundary band are skipped.
    pub fn validate(&self, samples: usize) -> Result<()> {
        let lo = self.alpha - 5.0;
        let hi = self.beta + 5.0;
        let n = samples.max(2);
        for i in 0..n {
            let u = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let (_, s1, s2) = self.eval(u);
            if !(s1.is_finite() && s2.is_finite()) {
                return Err(Error::InvalidModel(format!("non-finite derivative at u = {u}")));
            }
            if s1.abs() <= EPS_PAR {
                continue;
            }
            let ok = match self.kind {
                ModelKind::TypeI => s2 > 0.0 && ((u < self.alpha) == (s1 < 0.0)),
                ModelKind::TypeII | ModelKind::Custom => {
                    let outside = u < self.alpha || u > self.beta;
                    let slope_ok = outside == (s1 < 0.0);
                    let curvature_ok = if u <= self.alpha {
                        s2 > 0.0
                    } else if u >= self.beta {
                        s2 < 0.0
                    } else {
                        true
                    };
                    slope_ok && curvature_ok
                }
            };
            if !ok {
                return Err(Error::InvalidModel(format!(
                    "{} violates its sign pattern at u = {u} (σ′ = {s1}, σ″ = {s2})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_values() {
        let m = make_quadratic();
        assert_eq!(m.eval(-4.0), (8.0, -4.0, 1.0));
        assert_eq!(m.eval(0.0), (0.0, 0.0, 1.0));
        assert_eq!(m.eval(2.0), (2.0, 2.0, 1.0));
        assert_eq!(m.kind(), ModelKind::TypeI);
        assert_eq!(m.alpha(), m.beta());
    }

    #[test]
    fn cubic_values() {
        let m = make_cubic();
        let (s, s1, s2) = m.eval(-2.0);
        // independent evaluation of u - u^3/3 at -2
        let direct = -2.0 - (-8.0) / 3.0;
        assert!((s - direct).abs() < 1e-15);
        assert!((s - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!((s1, s2), (-3.0, 4.0));
        assert_eq!(m.eval(0.0), (0.0, 1.0, 0.0));
        let (s, s1, s2) = m.eval(1.0);
        assert!((s - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!((s1, s2), (0.0, -2.0));
    }

    #[test]
    fn eigenvalue_examples() {
        let q = make_quadratic();
        let (l1, l2) = q.eigenvalues(-4.0).unwrap();
        assert_eq!((l1, l2), (2.0, -2.0));
        assert_eq!(l1 * l1, 4.0);
        assert_eq!(q.eigenvalues(0.0), Some((0.0, -0.0)));
        assert_eq!(make_cubic().eigenvalues(0.5), None);
    }

    #[test]
    fn classify_examples() {
        let c = make_cubic();
        assert_eq!(c.classify(-2.0), PointClass::HyperbolicAlpha);
        assert_eq!(c.classify(0.0), PointClass::Elliptic);
        assert_eq!(c.classify(1.0), PointClass::Boundary);
        assert_eq!(c.classify(-1.0), PointClass::Boundary);
        assert_eq!(c.classify(3.0), PointClass::HyperbolicBeta);

        let q = make_quadratic();
        assert_eq!(q.classify(-1.0), PointClass::HyperbolicAlpha);
        assert_eq!(q.classify(1.0), PointClass::Elliptic);
        assert_eq!(q.classify(0.0), PointClass::Boundary);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for m in [make_quadratic(), make_cubic(), SigmaModel::cubic(0.5, 2.0).unwrap()] {
            for i in 0..=40 {
                let u = -4.0 + 0.2 * i as f64;
                let (_, s1, s2) = m.eval(u);
                let fd1 = (m.sigma(u + h) - m.sigma(u - h)) / (2.0 * h);
                let fd2 = (m.d1(u + h) - m.d1(u - h)) / (2.0 * h);
                assert!((fd1 - s1).abs() < 1e-6, "{} σ′ at {u}", m.name());
                assert!((fd2 - s2).abs() < 1e-6, "{} σ″ at {u}", m.name());
            }
        }
    }

    #[test]
    fn type_two_sign_pattern() {
        let m = make_cubic();
        m.validate(1000).unwrap();
        make_quadratic().validate(1000).unwrap();
        let lo = m.alpha() - 5.0;
        let hi = m.beta() + 5.0;
        for i in 0..1000 {
            let u = lo + (hi - lo) * i as f64 / 999.0;
            let (_, s1, s2) = m.eval(u);
            if s1.abs() <= EPS_PAR {
                continue;
            }
            if u < m.alpha() || u > m.beta() {
                assert!(s1 < 0.0);
            } else {
                assert!(s1 > 0.0);
            }
            if u <= m.alpha() {
                assert!(s2 > 0.0);
            }
            if u >= m.beta() {
                assert!(s2 < 0.0);
            }
        }
    }

    #[test]
    fn custom_model_is_checked_by_sampling() {
        let bad = SigmaModel::custom(
            "flipped",
            -1.0,
            1.0,
            Arc::new(|u: f64| u * u * u / 3.0 - u),
            Arc::new(|u: f64| u * u - 1.0),
            Arc::new(|u: f64| 2.0 * u),
        )
        .unwrap();
        assert!(bad.validate(200).is_err());
        assert!(SigmaModel::custom(
            "inverted",
            1.0,
            -1.0,
            Arc::new(|u: f64| u),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0)
        )
        .is_err());
    }

    #[test]
    fn hyperbolic_points_have_symmetric_eigenvalues() {
        for m in [make_quadratic(), make_cubic()] {
            for i in 0..500 {
                let u = -6.0 + 12.0 * i as f64 / 499.0;
                if m.classify(u).is_hyperbolic() {
                    let (l1, l2) = m.eigenvalues(u).unwrap();
                    assert_eq!(l1, -l2);
                    assert!((l1 - (-m.d1(u)).sqrt()).abs() < 1e-12);
                    assert!(l1 > 0.0);
                }
            }
        }
    }
}
