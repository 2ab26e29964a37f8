//! Proximal operator of `α̂/2 ‖·‖_* + β̂/2 ‖·‖₁` (up to scaling) through its
//! dual.
//!
//! The proximal step
//!
//! ```text
//! min_Θ ‖Θ − Φ̂‖²_F + α̂‖Θ‖_* + β̂‖Θ‖₁
//! ```
//!
//! is solved through the dual problem
//!
//! ```text
//! min_{L,S} ‖α̂L + β̂S − 2Φ̂‖²_F   s.t. ‖L‖₂ ≤ 1, ‖S‖_∞ ≤ 1
//! ```
//!
//! by block coordinate descent, where each block update is a Euclidean
//! projection with a closed form: singular-value clipping for the spectral
//! ball and entrywise clamping for the ℓ∞ ball. The primal point is then
//! `Θ = Φ̂ − (α̂L + β̂S)/2`.
//!
//! The single-norm proximal maps (singular value thresholding and entrywise
//! soft thresholding) used by the ADMM solvers live here as well.

use crate::error::{invalid, Result};
use crate::linalg::ThinSvd;
use crate::types::{check_finite, Matrix};

/// Dual variables of the proximal subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    /// Spectral-ball variable, `‖L‖₂ ≤ 1`.
    pub l: Matrix,
    /// ℓ∞-ball variable, `max |s_ij| ≤ 1`.
    pub s: Matrix,
}

impl DualPair {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            l: Matrix::zeros(rows, cols),
            s: Matrix::zeros(rows, cols),
        }
    }
}

/// The shifted point and the rescaled weights of one proximal step.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxInput {
    pub phi_hat: Matrix,
    pub alpha_hat: f64,
    pub beta_hat: f64,
}

impl ProxInput {
    pub fn new(phi_hat: Matrix, alpha_hat: f64, beta_hat: f64) -> Result<Self> {
        if !(alpha_hat.is_finite() && alpha_hat >= 0.0) {
            return Err(invalid("alpha_hat", "must be finite and >= 0"));
        }
        if !(beta_hat.is_finite() && beta_hat >= 0.0) {
            return Err(invalid("beta_hat", "must be finite and >= 0"));
        }
        check_finite("phi_hat", &phi_hat)?;
        Ok(Self {
            phi_hat,
            alpha_hat,
            beta_hat,
        })
    }

    /// Input of the step taken at search point `phi` with gradient `grad` and
    /// step parameter `gamma` for weights `(alpha, beta)`.
    pub fn from_gradient_step(phi: &Matrix, grad: &Matrix, gamma: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(phi - grad / gamma, 2.0 * alpha / gamma, 2.0 * beta / gamma)
    }

    /// `‖Θ − Φ̂‖²_F + α̂‖Θ‖_* + β̂‖Θ‖₁`.
    pub fn primal_objective(&self, theta: &Matrix) -> Result<f64> {
        let mut f = (theta - &self.phi_hat).norm_squared();
        if self.alpha_hat != 0.0 {
            f += self.alpha_hat * crate::objective::trace_norm(theta)?;
        }
        if self.beta_hat != 0.0 {
            f += self.beta_hat * crate::objective::l1_norm(theta);
        }
        Ok(f)
    }

    /// `‖α̂L + β̂S − 2Φ̂‖²_F`.
    pub fn dual_objective(&self, dual: &DualPair) -> f64 {
        (&dual.l * self.alpha_hat + &dual.s * self.beta_hat - &self.phi_hat * 2.0).norm_squared()
    }

    /// `Φ̂ − (α̂L + β̂S)/2`.
    pub fn primal_from_dual(&self, dual: &DualPair) -> Matrix {
        &self.phi_hat - (&dual.l * self.alpha_hat + &dual.s * self.beta_hat) * 0.5
    }
}

/// Singular values up to this much above 1 count as inside the spectral
/// ball, so that projecting a projected matrix returns it unchanged.
pub const SPECTRAL_FEASIBILITY_TOL: f64 = 1e-12;

/// Euclidean projection onto the unit spectral-norm ball: singular values
/// are clipped at 1.
pub fn project_spectral_ball(m: &Matrix) -> Result<Matrix> {
    check_finite("m", m)?;
    let svd = ThinSvd::new(m)?;
    if svd.sigma.iter().all(|&s| s <= 1.0 + SPECTRAL_FEASIBILITY_TOL) {
        return Ok(m.clone());
    }
    Ok(svd.recompose_with(|s| s.min(1.0)))
}

/// Euclidean projection onto the unit ℓ∞ ball: entrywise clamp to `[-1, 1]`.
pub fn project_linf_ball(m: &Matrix) -> Matrix {
    m.map(|x| x.clamp(-1.0, 1.0))
}

/// Singular value thresholding, `U diag((σ_i − τ)₊) Vᵀ`.
pub fn svt(m: &Matrix, tau: f64) -> Result<Matrix> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid("tau", "must be finite and >= 0"));
    }
    if tau == 0.0 {
        return Ok(m.clone());
    }
    let svd = ThinSvd::new(m)?;
    Ok(svd.recompose_with(|s| (s - tau).max(0.0)))
}

/// Entrywise soft thresholding, `sign(m) max(|m| − τ, 0)`.
pub fn soft_threshold(m: &Matrix, tau: f64) -> Result<Matrix> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid("tau", "must be finite and >= 0"));
    }
    Ok(m.map(|x| soft_threshold_scalar(x, tau)))
}

#[inline]
pub(crate) fn soft_threshold_scalar(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Result of the dual coordinate descent.
#[derive(Debug, Clone)]
pub struct DualSolve {
    pub dual: DualPair,
    /// Dual objective after the last sweep.
    pub objective: f64,
    pub sweeps: usize,
    /// `false` when `max_iter` sweeps ran without meeting the tolerance. The
    /// pair is dual feasible either way.
    pub converged: bool,
    /// Dual objective after each sweep, starting from the `L = S = 0` value.
    pub history: alloc::vec::Vec<f64>,
}

/// Stopping rule of the dual coordinate descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Compare the per-sweep decrease against `tol * max(1, objective)`
    /// instead of `tol`.
    pub relative: bool,
}

impl CdOptions {
    pub fn absolute(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            relative: false,
        }
    }

    pub fn relative(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            relative: true,
        }
    }
}

/// Alternating projections on the dual of the proximal step.
///
/// Starts from `L = S = 0`; each sweep updates `L` and then `S` by exact
/// block minimization. Stops when a sweep decreases the dual objective by
/// less than `tol` (absolute) or after `max_iter` sweeps.
pub fn dual_cd_solve(input: &ProxInput, tol: f64, max_iter: usize) -> Result<DualSolve> {
    dual_cd_solve_with(input, CdOptions::absolute(tol, max_iter))
}

/// [`dual_cd_solve`] with an explicit stopping rule.
pub fn dual_cd_solve_with(input: &ProxInput, opts: CdOptions) -> Result<DualSolve> {
    let CdOptions {
        tol,
        max_iter,
        relative,
    } = opts;
    let (ah, bh) = (input.alpha_hat, input.beta_hat);
    if ah <= 0.0 {
        return Err(invalid("alpha_hat", "dual solve requires alpha_hat > 0"));
    }
    if bh <= 0.0 {
        return Err(invalid("beta_hat", "dual solve requires beta_hat > 0"));
    }
    if max_iter == 0 {
        return Err(invalid("max_iter", "must be >= 1"));
    }
    let (rows, cols) = input.phi_hat.shape();
    let two_phi = &input.phi_hat * 2.0;
    let mut dual = DualPair::zeros(rows, cols);
    let mut prev = two_phi.norm_squared();
    let mut history = alloc::vec![prev];
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < max_iter {
        dual.l = project_spectral_ball(&((&two_phi - &dual.s * bh) / ah))?;
        dual.s = project_linf_ball(&((&two_phi - &dual.l * ah) / bh));
        sweeps += 1;

        let obj = input.dual_objective(&dual);
        history.push(obj);
        let threshold = if relative { tol * obj.max(1.0) } else { tol };
        if prev - obj < threshold {
            converged = true;
            prev = obj;
            break;
        }
        prev = obj;
    }

    Ok(DualSolve {
        dual,
        objective: prev,
        sweeps,
        converged,
        history,
    })
}

/// Output of [`prox_composite`].
#[derive(Debug, Clone)]
pub struct ProxOutput {
    pub theta: Matrix,
    pub dual: DualPair,
    /// Dual sweeps performed (0 on the closed-form paths).
    pub sweeps: usize,
    pub converged: bool,
}

/// `argmin_Θ ‖Θ − Φ̂‖²_F + α̂‖Θ‖_* + β̂‖Θ‖₁`.
///
/// With both weights positive the dual is solved by [`dual_cd_solve`].
/// A zero weight reduces the step to a single-norm proximal map, evaluated
/// in closed form; the returned dual pair is then the projection of
/// `2Φ̂ / weight` onto the active ball.
pub fn prox_composite(input: &ProxInput, tol: f64, max_iter: usize) -> Result<ProxOutput> {
    let (ah, bh) = (input.alpha_hat, input.beta_hat);
    let (rows, cols) = input.phi_hat.shape();
    match (ah > 0.0, bh > 0.0) {
        (false, false) => Ok(ProxOutput {
            theta: input.phi_hat.clone(),
            dual: DualPair::zeros(rows, cols),
            sweeps: 0,
            converged: true,
        }),
        (false, true) => {
            let s = project_linf_ball(&(&input.phi_hat * (2.0 / bh)));
            Ok(ProxOutput {
                theta: soft_threshold(&input.phi_hat, bh / 2.0)?,
                dual: DualPair {
                    l: Matrix::zeros(rows, cols),
                    s,
                },
                sweeps: 0,
                converged: true,
            })
        }
        (true, false) => {
            let svd = ThinSvd::new(&input.phi_hat)?;
            let tau = ah / 2.0;
            let theta = svd.recompose_with(|s| (s - tau).max(0.0));
            let l = svd.recompose_with(|s| (s / tau).min(1.0));
            Ok(ProxOutput {
                theta,
                dual: DualPair {
                    l,
                    s: Matrix::zeros(rows, cols),
                },
                sweeps: 0,
                converged: true,
            })
        }
        (true, true) => {
            let solved = dual_cd_solve(input, tol, max_iter)?;
            Ok(ProxOutput {
                theta: input.primal_from_dual(&solved.dual),
                dual: solved.dual,
                sweeps: solved.sweeps,
                converged: solved.converged,
            })
        }
    }
}

/// Violation of `(m − Θ)/τ ∈ ∂‖Θ‖_*`, the optimality condition of
/// `Θ = svt(m, τ)`: spectral-norm excess over 1 plus the gap
/// `‖Θ‖_* − ⟨(m − Θ)/τ, Θ⟩`.
pub fn svt_optimality_gap(m: &Matrix, tau: f64, theta: &Matrix) -> Result<f64> {
    if tau <= 0.0 {
        return Ok((m - theta).norm());
    }
    let g = (m - theta) / tau;
    let excess = (crate::linalg::spectral_norm(&g)? - 1.0).max(0.0);
    let gap = crate::objective::trace_norm(theta)? - crate::linalg::inner(&g, theta);
    Ok(excess + gap.abs())
}

/// Violation of the subgradient conditions certified by a dual pair:
/// `L ∈ ∂‖Θ‖_*` and `S ∈ ∂‖Θ‖₁`, measured as ball excess plus the gaps
/// `‖Θ‖_* − ⟨L, Θ⟩` and `‖Θ‖₁ − ⟨S, Θ⟩`. Zero exactly when `(Θ, L, S)` is
/// optimal for the composite step, since `Θ = Φ̂ − (α̂L + β̂S)/2` holds by
/// construction.
pub fn composite_optimality_gap(theta: &Matrix, dual: &DualPair) -> Result<f64> {
    let l_excess = (crate::linalg::spectral_norm(&dual.l)? - 1.0).max(0.0);
    let s_excess = (dual.s.amax() - 1.0).max(0.0);
    let l_gap = crate::objective::trace_norm(theta)? - crate::linalg::inner(&dual.l, theta);
    let s_gap = crate::objective::l1_norm(theta) - crate::linalg::inner(&dual.s, theta);
    Ok(l_excess + s_excess + l_gap.abs() + s_gap.abs())
}
