//! Empirical error, its gradient, the two regularizers and the composite
//! objective `S(Θ) + α‖Θ‖_* + β‖Θ‖₁`.

use crate::error::Result;
use crate::linalg;
use crate::types::{Matrix, ProblemInstance, RegPair};

/// A smooth data-fit term over the coefficient matrix.
pub trait SmoothLoss {
    fn value(&self, p: &ProblemInstance, theta: &Matrix) -> Result<f64>;

    fn gradient(&self, p: &ProblemInstance, theta: &Matrix) -> Result<Matrix>;

    /// Lipschitz constant of the gradient.
    fn lipschitz(&self, p: &ProblemInstance) -> Result<f64>;
}

/// `‖G_X Θ − Y‖²_F / N`.
#[derive(Debug, Default, Clone, Copy)]
pub struct LeastSquares;

impl SmoothLoss for LeastSquares {
    fn value(&self, p: &ProblemInstance, theta: &Matrix) -> Result<f64> {
        empirical_error(p, theta)
    }

    fn gradient(&self, p: &ProblemInstance, theta: &Matrix) -> Result<Matrix> {
        smooth_grad(p, theta)
    }

    fn lipschitz(&self, p: &ProblemInstance) -> Result<f64> {
        let s = linalg::spectral_norm(p.gx())?;
        Ok(2.0 * s * s / p.big_n())
    }
}

fn residual(p: &ProblemInstance, theta: &Matrix) -> Result<Matrix> {
    p.check_theta("theta", theta)?;
    Ok(p.gx() * theta - p.y())
}

/// `‖G_X Θ − Y‖²_F / N`.
pub fn empirical_error(p: &ProblemInstance, theta: &Matrix) -> Result<f64> {
    Ok(residual(p, theta)?.norm_squared() / p.big_n())
}

/// `(2/N) G_Xᵀ (G_X Θ − Y)`.
pub fn smooth_grad(p: &ProblemInstance, theta: &Matrix) -> Result<Matrix> {
    let r = residual(p, theta)?;
    Ok(p.gx().tr_mul(&r) * (2.0 / p.big_n()))
}

/// Sum of singular values.
pub fn trace_norm(m: &Matrix) -> Result<f64> {
    Ok(linalg::singular_values(m)?.iter().sum())
}

/// Sum of absolute entries.
pub fn l1_norm(m: &Matrix) -> f64 {
    m.iter().map(|x| x.abs()).sum()
}

/// The composite objective.
pub fn objective_eval(p: &ProblemInstance, theta: &Matrix, reg: RegPair) -> Result<f64> {
    let mut f = empirical_error(p, theta)?;
    if reg.alpha != 0.0 {
        f += reg.alpha * trace_norm(theta)?;
    }
    if reg.beta != 0.0 {
        f += reg.beta * l1_norm(theta);
    }
    Ok(f)
}

/// `α‖Θ‖_* + β‖Θ‖₁`.
pub fn penalty(theta: &Matrix, reg: RegPair) -> Result<f64> {
    let mut g = 0.0;
    if reg.alpha != 0.0 {
        g += reg.alpha * trace_norm(theta)?;
    }
    if reg.beta != 0.0 {
        g += reg.beta * l1_norm(theta);
    }
    Ok(g)
}
