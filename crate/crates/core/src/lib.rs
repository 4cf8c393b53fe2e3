//! Numerics for slice hyperholomorphic functions of a quaternionic variable:
//! slice functions, Cauchy kernels, contour integrals, Cauchy transforms,
//! spherical Laurent series and the global operators `G_L`, `G_R`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

mod error;

pub mod contour;
pub mod globalop;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod quaternion;
pub mod series;
pub mod slicefunc;
pub mod transform;

pub use error::{Error, Result};
pub use quaternion::{Quaternion, QSphere, SlicePoint, UnitImaginary};
