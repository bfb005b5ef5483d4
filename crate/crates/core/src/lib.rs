//! Separation from linear optimization over full-dimensional convex bodies.
//!
//! Given only a support (linear-optimization) oracle for a convex body `K`
//! that contains a ball around the origin, decide whether a point `p` lies in
//! `K` or find a direction `c` with `c·x < c·p` for all `x` in `K`.
//!
//! Two reductions are provided:
//!
//! * [`reductions::heuristic_reduction`] searches the unit sphere of
//!   directions with an analytic-center cutting-plane method. Cuts come from
//!   the correction step `p - k_c` with its component along `c` removed, and
//!   queried directions are always the normalized analytic center, which is a
//!   nonnegative combination of the cut normals.
//! * [`reductions::standard_reduction`] solves feasibility over
//!   `Q_p = K* ∩ {y : p·y >= 1}` using polar separation built from the same
//!   support oracle.
//!
//! [`bodies::distance_to_body`] is an independent minimum-norm-point oracle
//! used as ground truth, and [`harness`] runs both reductions over corpora of
//! instances (in parallel with the `parallel` feature).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic_center;
pub mod bodies;
pub mod cutting_plane;
mod error;
pub mod harness;
pub mod heuristic;
pub mod io;
pub mod reductions;
pub mod trace;

pub use error::{ConstraintRef, Error, Result};

/// Dense column vector used throughout.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Numerical tolerances shared by the oracles and solvers.
pub mod tol {
    /// Norm below which a direction or point counts as zero.
    pub const ZERO: f64 = 1e-12;
    /// Absolute slack on support-oracle comparisons.
    pub const SUPPORT: f64 = 1e-12;
    /// Slack on polar membership `h_K(y) <= 1`.
    pub const POLAR: f64 = 1e-9;
    /// Gradient-norm target of the Newton centering.
    pub const NEWTON: f64 = 1e-10;
}

#[cfg(test)]
pub(crate) fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// Rescales `v` so that its largest absolute entry is one.
pub fn normalize_inf(v: &Vector) -> Vector {
    let m = v.amax();
    if m > 0.0 {
        v / m
    } else {
        v.clone()
    }
}
