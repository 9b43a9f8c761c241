//! Chains of path geometries: second-order ODEs `y″ = f(x, y, y′)`, their
//! chain equations, the Fefferman null-geodesic lift, and homogeneous models.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod expr;
pub mod fefferman;
pub mod geometry;
pub mod integrate;
pub mod jet;
pub mod lie;
pub mod output;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::SecondOrderOde;
