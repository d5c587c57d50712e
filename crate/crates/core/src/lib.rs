//! Numerical tools for holomorphic maps near fixed points: linearizing
//! coordinates, run-away detection, spiral-cut invariant domains, rational
//! approximation with prescribed poles, and limit-function fiber checks.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod conjugacy;
pub mod error;
pub mod geometry;
pub mod io;
mod linalg;
pub mod omega_analysis;
pub mod poly;
pub mod runge_engine;
pub mod spiral_domain;
pub mod symbol_dynamics;

pub use error::{LabError, Result};
pub use geometry::{ComplexPoint, CompactGridSet, GridSpec};
pub use num_complex::Complex64;
