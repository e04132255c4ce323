use std::path::PathBuf;

use crate::config::ConfigError;
use crate::riemann::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why the time integrator refused to accept a step.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// `max |u_x|` exceeded the gradient limit.
    Gradient { max_grad: f64 },
    /// Fraction of spectral amplitude in the top third of modes exceeded the tail limit.
    SpectralTail { tail: f64 },
    /// The state contains NaN or infinite values.
    NonFinite,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("u = {u} lies on the wrong side of the anchor {anchor} for a {side:?} transform")]
    WrongSide { u: f64, anchor: f64, side: Side },

    #[error("adaptive quadrature missed tolerance {tol:e} (error estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("q-inverse argument {y} is outside the attained range [0, {max}]")]
    OutOfRange { y: f64, max: f64 },

    #[error("u = {u} lies inside the hyperbolic boundary band")]
    BoundaryDegeneracy { u: f64 },

    #[error("characteristic start (t = {t}, x = {x}) has u = {u}, which is not strictly hyperbolic")]
    StartNotHyperbolic { t: f64, x: f64, u: f64 },

    #[error("frame {index} needs a predecessor and a successor (field has {len} frames)")]
    InsufficientFrames { index: usize, len: usize },

    #[error("step from t = {t} rejected: {reason:?}")]
    StepRejected { t: f64, reason: RejectReason },

    #[error("initial frame is not inside a single hyperbolic component")]
    InitialNotHyperbolic,

    #[error("integration step failed: {0}")]
    StepFailure(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("weight function needs alpha < beta (got alpha = {alpha}, beta = {beta})")]
    DegenerateInterval { alpha: f64, beta: f64 },

    #[error("frame {frame}: {} grid points lie outside the elliptic band (first: {:?})", points.len(), points.first())]
    OutsideEllipticBand { frame: usize, points: Vec<usize> },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
