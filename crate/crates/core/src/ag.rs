//! Accelerated proximal gradient solver.
//!
//! Each iteration builds a Nesterov search point from the last two iterates,
//! backtracks on the step parameter `γ` until the quadratic upper bound of
//! the smooth loss holds, and takes the composite proximal step of
//! [`prox::prox_composite`]. `γ` only ever grows.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::objective::{self, LeastSquares, SmoothLoss};
use crate::prox::{self, ProxInput};
use crate::types::{Clock, Matrix, NullClock, ProblemInstance, RegPair, SolverConfig, SolverResult, TracePoint};

/// Line search gives up once `γ` exceeds this value.
pub const GAMMA_CEILING: f64 = 1e30;

/// `Θ_curr + ((t_prev − 1) / t_curr) (Θ_curr − Θ_prev)`.
pub fn make_search_point(theta_curr: &Matrix, theta_prev: &Matrix, t_curr: f64, t_prev: f64) -> Matrix {
    let coef = (t_prev - 1.0) / t_curr;
    if coef == 0.0 {
        return theta_curr.clone();
    }
    theta_curr + (theta_curr - theta_prev) * coef
}

/// Next momentum parameter, `(1 + sqrt(1 + 4 t²)) / 2`.
pub fn next_momentum(t: f64) -> f64 {
    (1.0 + Float::sqrt(1.0 + 4.0 * t * t)) / 2.0
}

/// Default initial step parameter: `max(1e-8, L_f / 100)`.
pub fn default_gamma_init(p: &ProblemInstance) -> Result<f64> {
    Ok((LeastSquares.lipschitz(p)? / 100.0).max(1e-8))
}

/// An accepted backtracking step.
#[derive(Debug, Clone)]
pub struct Step {
    pub gamma: f64,
    pub theta: Matrix,
    /// Number of `γ` values tried, including the accepted one.
    pub trials: usize,
    /// The dual solver of an accepted or rejected trial hit its sweep cap.
    pub inner_cap_hit: bool,
}

/// Smallest `γ ∈ {γ_start · growthⁱ}` for which
/// `S(Θ) ≤ S(Φ) + ⟨∇S(Φ), Θ − Φ⟩ + (γ/2)‖Θ − Φ‖²_F`, with `Θ` the proximal
/// step from `phi` at that `γ`.
///
/// The left side minus the linear model is evaluated as
/// `‖G_X (Θ − Φ)‖²_F / N`, which is the same quantity for the least-squares
/// loss without cancellation error.
pub fn line_search(
    p: &ProblemInstance,
    phi: &Matrix,
    reg: RegPair,
    gamma_start: f64,
    growth: f64,
    inner_tol: f64,
    inner_max_iter: usize,
) -> Result<Step> {
    if !(gamma_start.is_finite() && gamma_start > 0.0) {
        return Err(crate::error::invalid("gamma_start", "must be > 0"));
    }
    if !(growth.is_finite() && growth > 1.0) {
        return Err(crate::error::invalid("growth", "must be > 1"));
    }
    let grad = objective::smooth_grad(p, phi)?;
    let mut gamma = gamma_start;
    let mut trials = 0;
    let mut inner_cap_hit = false;
    loop {
        trials += 1;
        let input = ProxInput::from_gradient_step(phi, &grad, gamma, reg.alpha, reg.beta)?;
        let out = prox::prox_composite(&input, inner_tol, inner_max_iter)?;
        inner_cap_hit |= !out.converged;
        let diff = &out.theta - phi;
        let curvature = (p.gx() * &diff).norm_squared() / p.big_n();
        if curvature <= 0.5 * gamma * diff.norm_squared() {
            return Ok(Step {
                gamma,
                theta: out.theta,
                trials,
                inner_cap_hit,
            });
        }
        gamma *= growth;
        if gamma > GAMMA_CEILING || !gamma.is_finite() {
            return Err(Error::StepOverflow { gamma });
        }
    }
}

/// Minimizes the composite objective from `theta0` (zero when `None`).
pub fn ag_solve(
    p: &ProblemInstance,
    reg: RegPair,
    cfg: &SolverConfig,
    theta0: Option<&Matrix>,
) -> Result<SolverResult> {
    ag_solve_with_clock(p, reg, cfg, theta0, &NullClock)
}

/// [`ag_solve`] with wall time sampled from `clock` for the trace.
pub fn ag_solve_with_clock(
    p: &ProblemInstance,
    reg: RegPair,
    cfg: &SolverConfig,
    theta0: Option<&Matrix>,
    clock: &dyn Clock,
) -> Result<SolverResult> {
    cfg.validate()?;
    let reg = RegPair::new(reg.alpha, reg.beta)?;
    let (h, k) = p.theta_shape();
    let theta0 = match theta0 {
        Some(t) => {
            p.check_theta("theta0", t)?;
            t.clone()
        }
        None => Matrix::zeros(h, k),
    };

    let mut gamma = match cfg.gamma_init {
        Some(g) => g,
        None => default_gamma_init(p)?,
    };
    let mut theta_prev = theta0.clone();
    let mut theta = theta0;
    let mut t_prev = 1.0;
    let mut t_curr = 1.0;
    let mut f_prev = objective::objective_eval(p, &theta, reg)?;
    if !f_prev.is_finite() {
        return Err(Error::Diverged { iteration: 0 });
    }
    let mut trace = Vec::new();
    trace.push(TracePoint {
        iter: 0,
        objective: f_prev,
        seconds: clock.seconds(),
    });
    let mut converged = cfg.target_reached(f_prev);
    let mut iterations = 0;
    let mut inner_cap_hits = 0;

    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let phi = make_search_point(&theta, &theta_prev, t_curr, t_prev);
        let step = line_search(p, &phi, reg, gamma, cfg.gamma_growth, cfg.inner_tol, cfg.inner_max_iter)?;
        debug_assert!(descent_condition_holds(p, &phi, &step.theta, step.gamma));
        gamma = step.gamma;
        inner_cap_hits += usize::from(step.inner_cap_hit);

        theta_prev = core::mem::replace(&mut theta, step.theta);
        t_prev = t_curr;
        t_curr = next_momentum(t_curr);

        let f = objective::objective_eval(p, &theta, reg)?;
        if !f.is_finite() {
            return Err(Error::Diverged { iteration: iterations });
        }
        trace.push(TracePoint {
            iter: iterations,
            objective: f,
            seconds: clock.seconds(),
        });
        converged = cfg.target_reached(f) || cfg.stop_on_change(f_prev, f);
        f_prev = f;
    }

    Ok(SolverResult {
        theta,
        objective: f_prev,
        iterations,
        trace,
        converged,
        inner_cap_hits,
    })
}

/// The backtracking inequality exactly as written, up to rounding in the
/// loss evaluations.
pub fn descent_condition_holds(p: &ProblemInstance, phi: &Matrix, theta: &Matrix, gamma: f64) -> bool {
    let eval = || -> Result<bool> {
        let s_theta = objective::empirical_error(p, theta)?;
        let s_phi = objective::empirical_error(p, phi)?;
        let grad = objective::smooth_grad(p, phi)?;
        let diff = theta - phi;
        let rhs = s_phi + crate::linalg::inner(&grad, &diff) + 0.5 * gamma * diff.norm_squared();
        Ok(s_theta <= rhs + 1e-9 * (1.0 + s_phi.abs()))
    };
    eval().unwrap_or(false)
}
