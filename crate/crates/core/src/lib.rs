// `!(x > 0.0)` is used on purpose so that NaN fails domain checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Explicit solutions of time-fractional anomalous diffusion equations with
//! space-time dependent diffusivity,
//!
//! ```text
//! D_t^alpha u = t^m (A x^d u_xx + B x^(d-1) u_x + C x^(d-2) u),   x, t > 0,
//! ```
//!
//! together with the special-function machinery they are written in: a
//! Mellin-Barnes evaluator for the Fox H-function, a series evaluator for the
//! generalized Wright function, and exact Riemann-Liouville calculus on
//! generalized power series used to verify the solutions coefficient by
//! coefficient.

pub mod cli;
pub mod error;
pub mod fox_h;
pub mod frac_series;
pub mod gamma;
pub mod poly;
pub mod solver_ode;
pub mod solver_pde;
mod sum;
pub mod verify;
pub mod wright;

pub use error::{Error, Result};
pub use num_complex::Complex64;
