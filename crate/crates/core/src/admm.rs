//! ADMM solvers for the composite objective.
//!
//! * ADMM1 splits `Θ = Ψ`, keeping the ℓ1 term on `Θ` and the trace norm on
//!   `Ψ`. The `Θ` subproblem is solved by an inner proximal gradient loop;
//!   `Ψ` is a singular value thresholding step.
//! * ADMM2 splits `Θ = Ψ¹ = Ψ²` with the trace norm on `Ψ¹` and the ℓ1 term
//!   on `Ψ²`. The `Θ` subproblem is a linear system whose matrix does not
//!   change between iterations and is factored once.
//!
//! Multipliers are unscaled: the augmented Lagrangian carries
//! `⟨Θ − Ψ, Γ⟩ + (ρ/2)‖Θ − Ψ‖²`.

use alloc::vec::Vec;

use nalgebra::Cholesky;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::objective;
use crate::prox::{self, soft_threshold_scalar};
use crate::types::{
    check_finite, Clock, Matrix, NullClock, ProblemInstance, RegPair, SolverConfig, SolverResult, TracePoint,
};

/// Inner proximal-gradient tolerance of the ADMM1 `Θ` subproblem.
pub const ADMM1_INNER_TOL: f64 = 1e-10;
/// Inner proximal-gradient iteration cap of the ADMM1 `Θ` subproblem.
pub const ADMM1_INNER_MAX_ITER: usize = 10_000;

/// Iterates of either ADMM variant. ADMM1 leaves `psi2` and `gamma2` at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub theta: Matrix,
    pub psi1: Matrix,
    pub psi2: Matrix,
    pub gamma1: Matrix,
    pub gamma2: Matrix,
    pub iter: usize,
}

impl AdmmState {
    /// `Ψ¹ = Ψ² = Θ₀`, `Γ¹ = Γ² = 0`.
    pub fn new(theta0: Matrix) -> Self {
        let (h, k) = theta0.shape();
        Self {
            psi1: theta0.clone(),
            psi2: theta0.clone(),
            theta: theta0,
            gamma1: Matrix::zeros(h, k),
            gamma2: Matrix::zeros(h, k),
            iter: 0,
        }
    }

    fn check_finite(&self) -> Result<()> {
        check_finite("theta", &self.theta)?;
        check_finite("psi1", &self.psi1)?;
        check_finite("psi2", &self.psi2)?;
        check_finite("gamma1", &self.gamma1)?;
        check_finite("gamma2", &self.gamma2)
    }
}

/// Residual norms after one ADMM iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `max_i ‖Θ − Ψⁱ‖_F`.
    pub primal: f64,
    /// `max_i ρ_i ‖Ψⁱ_{k+1} − Ψⁱ_k‖_F`.
    pub dual: f64,
}

struct Setup {
    reg: RegPair,
    theta0: Matrix,
    /// `(2/N) G_Xᵀ G_X`.
    gram: Matrix,
    /// `(2/N) G_Xᵀ Y`.
    gty: Matrix,
}

fn setup(p: &ProblemInstance, reg: RegPair, cfg: &SolverConfig, theta0: Option<&Matrix>) -> Result<Setup> {
    cfg.validate()?;
    let reg = RegPair::new(reg.alpha, reg.beta)?;
    let theta0 = match theta0 {
        Some(t) => {
            p.check_theta("theta0", t)?;
            t.clone()
        }
        None => Matrix::zeros(p.h(), p.k()),
    };
    let scale = 2.0 / p.big_n();
    Ok(Setup {
        reg,
        theta0,
        gram: p.gx().tr_mul(p.gx()) * scale,
        gty: p.gx().tr_mul(p.y()) * scale,
    })
}

fn converged(cfg: &SolverConfig, f_prev: f64, f: f64, res: Residuals, dim: usize) -> bool {
    if cfg.target_reached(f) {
        return true;
    }
    let change_ok = cfg.stop_on_change(f_prev, f);
    if cfg.admm_objective_only {
        return change_ok;
    }
    let guard = cfg.obj_tol * Float::sqrt(dim as f64);
    change_ok && res.primal < guard && res.dual < guard
}

struct Driver<'a> {
    p: &'a ProblemInstance,
    reg: RegPair,
    cfg: &'a SolverConfig,
    clock: &'a dyn Clock,
    trace: Vec<TracePoint>,
    f_prev: f64,
}

impl<'a> Driver<'a> {
    fn new(
        p: &'a ProblemInstance,
        reg: RegPair,
        cfg: &'a SolverConfig,
        clock: &'a dyn Clock,
        theta0: &Matrix,
    ) -> Result<Self> {
        let f0 = objective::objective_eval(p, theta0, reg)?;
        if !f0.is_finite() {
            return Err(Error::Diverged { iteration: 0 });
        }
        let trace = alloc::vec![TracePoint {
            iter: 0,
            objective: f0,
            seconds: clock.seconds(),
        }];
        Ok(Self {
            p,
            reg,
            cfg,
            clock,
            trace,
            f_prev: f0,
        })
    }

    /// Records the objective at `state.theta`; returns `true` when the run
    /// should stop.
    fn record(&mut self, state: &AdmmState, res: Residuals) -> Result<bool> {
        state
            .check_finite()
            .map_err(|_| Error::Diverged { iteration: state.iter })?;
        let f = objective::objective_eval(self.p, &state.theta, self.reg)?;
        if !f.is_finite() {
            return Err(Error::Diverged { iteration: state.iter });
        }
        self.trace.push(TracePoint {
            iter: state.iter,
            objective: f,
            seconds: self.clock.seconds(),
        });
        let done = converged(self.cfg, self.f_prev, f, res, state.theta.len());
        self.f_prev = f;
        Ok(done)
    }

    fn finish(self, state: AdmmState, converged: bool, inner_cap_hits: usize) -> SolverResult {
        SolverResult {
            theta: state.theta,
            objective: self.f_prev,
            iterations: state.iter,
            trace: self.trace,
            converged,
            inner_cap_hits,
        }
    }
}

/// ADMM with one auxiliary variable.
pub fn admm1_solve(
    p: &ProblemInstance,
    reg: RegPair,
    cfg: &SolverConfig,
    theta0: Option<&Matrix>,
) -> Result<SolverResult> {
    admm1_solve_with_clock(p, reg, cfg, theta0, &NullClock)
}

/// [`admm1_solve`] with wall time sampled from `clock`.
pub fn admm1_solve_with_clock(
    p: &ProblemInstance,
    reg: RegPair,
    cfg: &SolverConfig,
    theta0: Option<&Matrix>,
    clock: &dyn Clock,
) -> Result<SolverResult> {
    let Setup { reg, theta0, gram, gty } = setup(p, reg, cfg, theta0)?;
    let rho = cfg.rho1;
    // Lipschitz constant of the smooth part of the Θ subproblem.
    let lip = crate::linalg::spectral_norm(&gram)? + rho;
    let mut driver = Driver::new(p, reg, cfg, clock, &theta0)?;
    let mut state = AdmmState::new(theta0);
    let mut inner_cap_hits = 0;
    let mut done = cfg.target_reached(driver.f_prev);

    while !done && state.iter < cfg.max_iter {
        state.iter += 1;
        let hit_cap = admm1_theta_update(&mut state, &gram, &gty, reg.beta, rho, lip);
        inner_cap_hits += usize::from(hit_cap);

        let psi_old = state.psi1.clone();
        state.psi1 = prox::svt(&(&state.theta + &state.gamma1 / rho), reg.alpha / rho)?;
        let r = &state.theta - &state.psi1;
        state.gamma1 += &r * rho;

        let res = Residuals {
            primal: r.norm(),
            dual: rho * (&state.psi1 - psi_old).norm(),
        };
        done = driver.record(&state, res)?;
    }
    Ok(driver.finish(state, done, inner_cap_hits))
}

/// Proximal gradient on
/// `(1/N)‖G_X Θ − Y‖² + β‖Θ‖₁ + ⟨Θ, Γ⟩ + (ρ/2)‖Θ − Ψ‖²`, warm-started at the
/// current `Θ`. Returns `true` when the iteration cap was hit.
fn admm1_theta_update(state: &mut AdmmState, gram: &Matrix, gty: &Matrix, beta: f64, rho: f64, lip: f64) -> bool {
    let step = 1.0 / lip;
    let thresh = beta * step;
    for _ in 0..ADMM1_INNER_MAX_ITER {
        let grad = gram * &state.theta - gty + &state.gamma1 + (&state.theta - &state.psi1) * rho;
        let next = (&state.theta - grad * step).map(|x| soft_threshold_scalar(x, thresh));
        let moved = (&next - &state.theta).norm();
        state.theta = next;
        if moved < ADMM1_INNER_TOL {
            return false;
        }
    }
    true
}

/// ADMM with two auxiliary variables.
pub fn admm2_solve(
    p: &ProblemInstance,
    reg: RegPair,
    cfg: &SolverConfig,
    theta0: Option<&Matrix>,
) -> Result<SolverResult> {
    admm2_solve_with_clock(p, reg, cfg, theta0, &NullClock)
}

/// [`admm2_solve`] with wall time sampled from `clock`.
pub fn admm2_solve_with_clock(
    p: &ProblemInstance,
    reg: RegPair,
    cfg: &SolverConfig,
    theta0: Option<&Matrix>,
    clock: &dyn Clock,
) -> Result<SolverResult> {
    let Setup { reg, theta0, gram, gty } = setup(p, reg, cfg, theta0)?;
    let (rho1, rho2) = (cfg.rho1, cfg.rho2);
    let chol = admm2_system(&gram, rho1 + rho2)?;
    let mut driver = Driver::new(p, reg, cfg, clock, &theta0)?;
    let mut state = AdmmState::new(theta0);
    let mut done = cfg.target_reached(driver.f_prev);

    while !done && state.iter < cfg.max_iter {
        state.iter += 1;
        let rhs = &gty - &state.gamma1 - &state.gamma2 + &state.psi1 * rho1 + &state.psi2 * rho2;
        state.theta = chol.solve(&rhs);

        let psi1_old = core::mem::replace(
            &mut state.psi1,
            prox::svt(&(&state.theta + &state.gamma1 / rho1), reg.alpha / rho1)?,
        );
        let psi2_old = core::mem::replace(
            &mut state.psi2,
            (&state.theta + &state.gamma2 / rho2).map(|x| soft_threshold_scalar(x, reg.beta / rho2)),
        );
        #[cfg(debug_assertions)]
        if state.iter % 100 == 0 {
            debug_assert!(prox::svt_optimality_gap(
                &(&state.theta + &state.gamma1 / rho1),
                reg.alpha / rho1,
                &state.psi1
            )
            .map_or(false, |g| g < 1e-6 * (1.0 + state.psi1.norm())));
        }

        let r1 = &state.theta - &state.psi1;
        let r2 = &state.theta - &state.psi2;
        state.gamma1 += &r1 * rho1;
        state.gamma2 += &r2 * rho2;

        let res = Residuals {
            primal: r1.norm().max(r2.norm()),
            dual: (rho1 * (&state.psi1 - psi1_old).norm()).max(rho2 * (&state.psi2 - psi2_old).norm()),
        };
        done = driver.record(&state, res)?;
    }
    Ok(driver.finish(state, done, 0))
}

/// Cholesky factor of `(2/N) G_Xᵀ G_X + ρ I`, the ADMM2 `Θ`-update matrix
/// (`gram` already carries the `2/N` factor).
pub fn admm2_system(gram: &Matrix, rho_sum: f64) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let h = gram.nrows();
    let m = gram + Matrix::identity(h, h) * rho_sum;
    Cholesky::new(m).ok_or(Error::SingularSystem)
}
