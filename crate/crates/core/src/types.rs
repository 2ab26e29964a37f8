//! Shared data model: problem instances, regularization weights, solver
//! configuration and solver output.
//!
//! Matrices are `nalgebra::DMatrix<f64>`, stored column-major. Nothing in the
//! crate depends on the storage order; file formats in the companion crate
//! address entries by `(row, col)`.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Dense real matrix used throughout the crate.
pub type Matrix = DMatrix<f64>;

/// A fixed-design multi-task regression problem.
///
/// `gx` holds the basis evaluations (`n x h`), `y` the responses (`n x k`).
/// With the default basis, `gx` is simply the feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    gx: Matrix,
    y: Matrix,
    big_n: f64,
}

impl ProblemInstance {
    /// Builds an instance after checking that the row counts agree, that no
    /// dimension is zero and that every entry is finite.
    ///
    /// This is the structural check every solver relies on. The stricter
    /// `h, k >= 2` requirement of the estimation setting is enforced by
    /// [`validate_instance`].
    pub fn new(gx: Matrix, y: Matrix) -> Result<Self> {
        if gx.nrows() == 0 || gx.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                field: "gx",
                expected: (gx.nrows().max(1), gx.ncols().max(1)),
                found: gx.shape(),
            });
        }
        if y.nrows() != gx.nrows() || y.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                field: "y",
                expected: (gx.nrows(), y.ncols().max(1)),
                found: y.shape(),
            });
        }
        check_finite("gx", &gx)?;
        check_finite("y", &y)?;
        let big_n = (y.nrows() * y.ncols()) as f64;
        Ok(Self { gx, y, big_n })
    }

    pub fn gx(&self) -> &Matrix {
        &self.gx
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    /// Sample count.
    pub fn n(&self) -> usize {
        self.gx.nrows()
    }

    /// Number of basis functions.
    pub fn h(&self) -> usize {
        self.gx.ncols()
    }

    /// Number of tasks.
    pub fn k(&self) -> usize {
        self.y.ncols()
    }

    /// `N = n * k`, the normalizer of the empirical error.
    pub fn big_n(&self) -> f64 {
        self.big_n
    }

    /// Shape `(h, k)` of the coefficient matrix.
    pub fn theta_shape(&self) -> (usize, usize) {
        (self.h(), self.k())
    }

    pub fn into_parts(self) -> (Matrix, Matrix) {
        (self.gx, self.y)
    }

    /// Checks that `theta` is an `h x k` finite matrix.
    pub fn check_theta(&self, field: &'static str, theta: &Matrix) -> Result<()> {
        if theta.shape() != self.theta_shape() {
            return Err(Error::DimensionMismatch {
                field,
                expected: self.theta_shape(),
                found: theta.shape(),
            });
        }
        check_finite(field, theta)
    }
}

/// Full invariant check for an estimation problem: structural validity plus
/// `n >= 1`, `h >= 2` and `k >= 2`.
///
/// Idempotent; a validated instance is returned unchanged.
pub fn validate_instance(p: ProblemInstance) -> Result<ProblemInstance> {
    if p.h() < 2 {
        return Err(Error::DimensionMismatch {
            field: "gx",
            expected: (p.n(), 2),
            found: p.gx.shape(),
        });
    }
    if p.k() < 2 {
        return Err(Error::DimensionMismatch {
            field: "y",
            expected: (p.n(), 2),
            found: p.y.shape(),
        });
    }
    check_finite("gx", &p.gx)?;
    check_finite("y", &p.y)?;
    Ok(p)
}

pub(crate) fn check_finite(field: &'static str, m: &Matrix) -> Result<()> {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if !m[(r, c)].is_finite() {
                return Err(Error::NonFinite { field, row: r, col: c });
            }
        }
    }
    Ok(())
}

/// Regularization weights: `alpha` on the trace norm, `beta` on the ℓ1 norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegPair {
    pub alpha: f64,
    pub beta: f64,
}

impl RegPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid("alpha", "must be finite and >= 0"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", "must be finite and >= 0"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn zero() -> Self {
        Self { alpha: 0.0, beta: 0.0 }
    }
}

/// Tolerances, caps and step parameters shared by the AG and ADMM solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Objective-change stopping threshold.
    pub obj_tol: f64,
    /// Measure the objective change relative to `max(1, |f|)` instead of
    /// absolutely.
    pub relative_stop: bool,
    /// Stop as soon as the objective is at or below this value.
    pub target_objective: Option<f64>,
    pub max_iter: usize,
    /// Initial step parameter. `None` selects `max(1e-8, L_f / 100)` where
    /// `L_f = 2 sigma_max(G_X)^2 / N`.
    pub gamma_init: Option<f64>,
    pub gamma_growth: f64,
    /// Dual coordinate-descent stopping threshold (absolute decrease).
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub rho1: f64,
    pub rho2: f64,
    /// ADMM: stop on objective change alone, without the primal-residual guard.
    pub admm_objective_only: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            obj_tol: 1e-8,
            relative_stop: false,
            target_objective: None,
            max_iter: 100_000,
            gamma_init: None,
            gamma_growth: 2.0,
            inner_tol: 1e-10,
            inner_max_iter: 50,
            rho1: 10.0,
            rho2: 10.0,
            admm_objective_only: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, "must be finite and > 0"))
            }
        };
        positive("obj_tol", self.obj_tol)?;
        positive("inner_tol", self.inner_tol)?;
        positive("rho1", self.rho1)?;
        positive("rho2", self.rho2)?;
        if let Some(g) = self.gamma_init {
            positive("gamma_init", g)?;
        }
        if !(self.gamma_growth.is_finite() && self.gamma_growth > 1.0) {
            return Err(invalid("gamma_growth", "must be > 1"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be >= 1"));
        }
        if self.inner_max_iter == 0 {
            return Err(invalid("inner_max_iter", "must be >= 1"));
        }
        Ok(())
    }

    pub(crate) fn stop_on_change(&self, prev: f64, curr: f64) -> bool {
        let change = (curr - prev).abs();
        if self.relative_stop {
            change < self.obj_tol * curr.abs().max(1.0)
        } else {
            change < self.obj_tol
        }
    }

    pub(crate) fn target_reached(&self, f: f64) -> bool {
        self.target_objective.is_some_and(|t| f <= t)
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iter: usize,
    pub objective: f64,
    pub seconds: f64,
}

/// Output of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub theta: Matrix,
    /// Objective of [`theta`](Self::theta).
    pub objective: f64,
    pub iterations: usize,
    pub trace: Vec<TracePoint>,
    pub converged: bool,
    /// Number of inner subproblem solves that hit their iteration cap.
    pub inner_cap_hits: usize,
}

/// Source of elapsed wall time for convergence traces.
pub trait Clock {
    /// Seconds since the clock was started.
    fn seconds(&self) -> f64;
}

/// A clock that always reads zero, for `no_std` targets.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullClock;

impl Clock for NullClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// Monotonic wall clock started at construction.
#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct WallClock(std::time::Instant);

#[cfg(feature = "std")]
impl WallClock {
    pub fn start() -> Self {
        Self(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
