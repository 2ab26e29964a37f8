//! Estimation of multiple predictive functions with a coefficient matrix that
//! is simultaneously sparse and low rank.
//!
//! The estimator minimizes
//!
//! ```text
//! ‖G_X Θ − Y‖²_F / N + α‖Θ‖_* + β‖Θ‖₁
//! ```
//!
//! over the `h x k` coefficient matrix `Θ`. Three solvers are provided:
//! an accelerated proximal gradient method whose proximal step is computed
//! through its dual by alternating projections ([`ag`], [`prox`]), and two
//! ADMM splittings ([`admm`]). The [`theory`] module evaluates the
//! structural inequalities satisfied by the minimizer, [`metrics`] scores
//! multi-label predictions and [`dataset`] / [`synthetic`] hold the
//! in-memory data helpers.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `sptrace` crate adds file formats and the command line.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod admm;
pub mod ag;
pub mod dataset;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod objective;
pub mod prox;
pub mod synthetic;
pub mod theory;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    validate_instance, Clock, Matrix, NullClock, ProblemInstance, RegPair, SolverConfig, SolverResult, TracePoint,
};

#[cfg(feature = "std")]
pub use types::WallClock;
