//! Finite-difference toolkit for one-dimensional damped semilinear wave
//! equations `u_tt - u_xx + h(t) u_t + f(u) = 0` on `(-L, L)` with Dirichlet
//! boundaries.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod equilibria;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod ode_lab;
pub mod physics;
pub mod rates;
pub mod stats;
pub mod tridiag;

pub use diagnostics::{Diagnostics, DiagnosticsRow};
pub use error::{Error, Result};
pub use grid::{Field, Grid1D};
pub use integrator::{SchemeConfig, WaveModel};
pub use physics::{Damping, Nonlinearity};
