//! Scalar abstraction for the numerical kernels.
//!
//! Every matrix in this crate is complex. [`ChanScalar`] bounds the complex
//! element type by what the kernels actually need: the `cauchy` scalar
//! interface (conjugation, real/imaginary parts, construction from `f64`
//! literals), a LAPACK backend for eigen/singular value decompositions, and
//! scalar broadcasting over `ndarray` arrays. It is implemented for
//! [`c32`](ndarray_linalg::c32) and [`c64`](ndarray_linalg::c64); tolerances
//! throughout the crate are stated as `f64` and converted with
//! [`Scalar::real`] at the comparison site.

use ndarray::ScalarOperand;
use ndarray_linalg::{Lapack, Scalar};
use num_traits::{Float, ToPrimitive};

/// Complex scalar type usable by every kernel in this crate.
pub trait ChanScalar: Scalar<Complex = Self> + Lapack + ScalarOperand {}

impl ChanScalar for ndarray_linalg::c32 {}
impl ChanScalar for ndarray_linalg::c64 {}

/// Validation slack matched to the scalar's precision: `1e-8` at double
/// precision, loosening with machine epsilon for narrower floats.
pub fn validation_tol<A: ChanScalar>() -> f64 {
    (A::Real::epsilon().to_f64().unwrap_or(f64::EPSILON) * 1e3).max(1e-8)
}
