//! Geodesics of the one-parameter family of solvable Lie groups `G_alpha`,
//! `-1 <= alpha <= 1`, which runs from Sol (`alpha = 1`) through H²×R
//! (`alpha = 0`) to hyperbolic space (`alpha = -1`).
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: group law, curvature data, the structure field on the unit
//!   tangent sphere and its conserved level function.
//! * [`special`]: complete elliptic integrals and `dn`, parameter convention
//!   `m = k²`.
//! * [`ode`] and [`quad`]: the adaptive Runge–Kutta integrator with dense
//!   output and the adaptive Gauss–Kronrod / tanh-sinh quadratures.
//! * [`flow`]: every ODE system (sphere flow, exponential map, symmetric
//!   flowlines, variational system) and the concatenation-product oracle.
//! * [`period`]: period functions of loop level sets and their derivative.
//! * [`cutlocus`]: plane curves, the cut-locus boundary and the verification
//!   checks.
//! * [`report`]: machine-readable results of grid checks.
//! * [`sphere`]: geodesic sphere meshes and OBJ export.
//! * [`sweep`]: data-parallel maps over parameter grids (rayon behind the
//!   `parallel` feature, sequential otherwise).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod algebra;
pub mod cutlocus;
mod error;
pub mod flow;
pub mod format;
pub mod ode;
pub mod period;
pub mod quad;
pub mod report;
pub mod special;
pub mod sphere;
pub mod sweep;

pub use algebra::{Alpha, GroupPoint, SphereState, Vec3};
pub use error::{Error, Result};
pub use ode::IntegratorConfig;
