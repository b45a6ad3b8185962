//! Computational toolkit for the norm-trace curve `N(x) = T(y)` over `F_{q^3}`.
//!
//! * [`ff`]: the field tower `F_p ⊂ F_q ⊂ F_{q^2}, F_{q^3}`, norm, trace and
//!   normal bases.
//! * [`normtrace`]: the curve itself and its affine points.
//! * [`intersect`]: exact intersection counts with graphs `y = A(x)` and the
//!   exhaustive or sampled sweeps over all such graphs.
//! * [`surface`]: the cubic surfaces attached to a parabola, their singular
//!   points and the point-count intervals per singularity pattern.
//! * [`agcode`]: the one-point code `C(D, 2q²P∞)` and its weight distribution.
//! * [`cli`]: the `ntlab` command-line front end.

pub mod agcode;
pub mod cli;
pub mod error;
pub mod ff;
pub mod intersect;
pub mod normtrace;
pub mod surface;

pub use error::{Error, Result};
