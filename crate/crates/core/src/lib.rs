//! Numerical laboratory for the p-system `u_t = −v_x`, `v_t = (σ(u))_x` on the circle.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod characteristics;
pub mod config;
pub mod constitutive;
pub mod energy;
pub mod error;
pub mod evolution;
pub mod field;
pub mod hamiltonian;
pub mod orchestrate;
pub mod quadrature;
pub mod riemann;
pub mod spectral;

pub use constitutive::{make_cubic, make_quadratic, PointClass, SigmaModel};
pub use error::{Error, Result};
pub use field::{Frame, StateField};
pub use riemann::{Family, QTransform, Side};
