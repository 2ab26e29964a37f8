//! Numerical checks of the structural inequalities behind the estimator's
//! error bound.
//!
//! Everything here evaluates both sides of an inequality on concrete
//! matrices so that the relations can be exercised on random inputs and on
//! solver output.

use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, ThinSvd};
use crate::objective::{l1_norm, trace_norm};
use crate::types::{Matrix, ProblemInstance, RegPair};

/// Entries with magnitude at or below this count as zero in `J(Θ)`.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Slack of [`check_trace_bound`].
pub const TRACE_BOUND_TOL: f64 = 1e-9;
/// Slack of [`check_l1_bound`].
pub const L1_BOUND_TOL: f64 = 1e-12;
/// Relative slack of [`check_lemma1`] for an approximate minimizer.
pub const LEMMA1_SLACK: f64 = 1e-5;

/// Both sides of an inequality `lhs ≤ rhs` and whether it held.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    fn with_slack(lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs + slack,
        }
    }
}

fn same_shape(a_name: &'static str, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            field: a_name,
            expected: b.shape(),
            found: a.shape(),
        });
    }
    Ok(())
}

/// Splits `delta` relative to the singular subspaces of `theta`.
///
/// With `U_r`, `V_r` the leading singular vectors of `theta` (rank by the
/// global tolerance), `S₁ = (I − U_r U_rᵀ) Δ (I − V_r V_rᵀ)` is the part of
/// `Δ` orthogonal to both subspaces and `S₀ = Δ − S₁`. This equals the block
/// construction on a completed full SVD without having to build the
/// orthogonal complements.
pub fn decompose_s0_s1(theta: &Matrix, delta: &Matrix) -> Result<(Matrix, Matrix)> {
    same_shape("delta", delta, theta)?;
    let svd = ThinSvd::new(theta)?;
    let r = svd.rank();
    if r == 0 {
        return Ok((Matrix::zeros(delta.nrows(), delta.ncols()), delta.clone()));
    }
    let u = svd.u_r(r);
    let v = svd.v_r(r);
    // Δ − U Uᵀ Δ, then remove the V-component from the right.
    let left = delta - &u * u.tr_mul(delta);
    let s1 = &left - (&left * &v) * v.transpose();
    let s0 = delta - &s1;
    Ok((s0, s1))
}

/// `‖Θ̂ − Θ‖_* + ‖Θ‖_* − ‖Θ̂‖_* ≤ 2‖S₀(Θ, Θ̂ − Θ)‖_*`.
pub fn check_trace_bound(theta_hat: &Matrix, theta: &Matrix) -> Result<Check> {
    same_shape("theta_hat", theta_hat, theta)?;
    let delta = theta_hat - theta;
    let (s0, _) = decompose_s0_s1(theta, &delta)?;
    let lhs = trace_norm(&delta)? + trace_norm(theta)? - trace_norm(theta_hat)?;
    let rhs = 2.0 * trace_norm(&s0)?;
    Ok(Check::with_slack(lhs, rhs, TRACE_BOUND_TOL))
}

/// `‖M_J‖₁` where `J` is the support of `theta`.
pub fn l1_on_support(m: &Matrix, theta: &Matrix) -> f64 {
    m.iter()
        .zip(theta.iter())
        .filter(|(_, t)| t.abs() > SUPPORT_TOL)
        .map(|(x, _)| x.abs())
        .sum()
}

/// `‖Θ̂ − Θ‖₁ + ‖Θ‖₁ − ‖Θ̂‖₁ ≤ 2‖(Θ̂ − Θ)_{J(Θ)}‖₁`.
pub fn check_l1_bound(theta_hat: &Matrix, theta: &Matrix) -> Result<Check> {
    same_shape("theta_hat", theta_hat, theta)?;
    let delta = theta_hat - theta;
    let lhs = l1_norm(&delta) + l1_norm(theta) - l1_norm(theta_hat);
    let rhs = 2.0 * l1_on_support(&delta, theta);
    Ok(Check::with_slack(lhs, rhs, L1_BOUND_TOL))
}

/// `λ = 2 σ_X σ_w √n (1 + √(k/n) + t) / N` with `N = n k`.
pub fn concentration_lambda(sigma_x: f64, sigma_w: f64, n: usize, k: usize, t: f64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    2.0 * sigma_x * sigma_w * Float::sqrt(nf) * (1.0 + Float::sqrt(kf / nf) + t) / (nf * kf)
}

/// `1 − exp(−n t² / 2)`.
pub fn concentration_bound(n: usize, t: f64) -> f64 {
    1.0 - Float::exp(-(n as f64) * t * t / 2.0)
}

/// Monte Carlo estimate of `P(‖Wᵀ G_X‖₂ / N ≤ λ/2)` for `W` an `n x k`
/// matrix of i.i.d. `N(0, σ_w²)` entries, together with the analytic lower
/// bound [`concentration_bound`].
///
/// Trial `i` draws from a generator seeded with `seed + i`, so the estimate
/// does not depend on evaluation order.
pub fn concentration_mc(gx: &Matrix, k: usize, sigma_w: f64, t: f64, trials: usize, seed: u64) -> Result<(f64, f64)> {
    if trials < 1000 {
        return Err(invalid("trials", "must be at least 1000"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("t", "must be finite and > 0"));
    }
    if !(sigma_w.is_finite() && sigma_w >= 0.0) {
        return Err(invalid("sigma_w", "must be finite and >= 0"));
    }
    if k == 0 {
        return Err(invalid("k", "must be >= 1"));
    }
    crate::types::check_finite("gx", gx)?;
    let n = gx.nrows();
    let big_n = (n * k) as f64;
    let lambda = concentration_lambda(linalg::spectral_norm(gx)?, sigma_w, n, k, t);
    let mut hits = 0usize;
    for i in 0..trials {
        if concentration_trial(gx, k, sigma_w, seed.wrapping_add(i as u64))? / big_n <= lambda / 2.0 {
            hits += 1;
        }
    }
    Ok((hits as f64 / trials as f64, concentration_bound(n, t)))
}

/// `‖Wᵀ G_X‖₂` for one noise draw.
pub fn concentration_trial(gx: &Matrix, k: usize, sigma_w: f64, seed: u64) -> Result<f64> {
    if sigma_w == 0.0 {
        return Ok(0.0);
    }
    let normal = Normal::new(0.0, sigma_w).map_err(|_| invalid("sigma_w", "must be finite and >= 0"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Matrix::from_fn(gx.nrows(), k, |_, _| normal.sample(&mut rng));
    linalg::spectral_norm(&w.tr_mul(gx))
}

/// Both sides of
///
/// ```text
/// ‖G_X Θ̂ − F‖²/N ≤ ‖G_X Θ − F‖²/N + 2α‖S₀(Θ, Θ̂ − Θ)‖_* + 2β‖(Θ̂ − Θ)_{J(Θ)}‖₁
/// ```
///
/// for a computed minimizer `theta_hat` and a comparison matrix `theta`.
/// The decomposition and support are taken relative to `theta`. The
/// inequality is judged with slack `1e-5 (1 + |rhs|)` for solver accuracy.
pub fn check_lemma1(
    p: &ProblemInstance,
    theta_hat: &Matrix,
    theta: &Matrix,
    reg: RegPair,
    f_true: &Matrix,
) -> Result<Check> {
    p.check_theta("theta_hat", theta_hat)?;
    p.check_theta("theta", theta)?;
    same_shape("f_true", f_true, p.y())?;
    let big_n = p.big_n();
    let fit = |m: &Matrix| (p.gx() * m - f_true).norm_squared() / big_n;
    let delta = theta_hat - theta;
    let (s0, _) = decompose_s0_s1(theta, &delta)?;
    let lhs = fit(theta_hat);
    let rhs = fit(theta) + 2.0 * reg.alpha * trace_norm(&s0)? + 2.0 * reg.beta * l1_on_support(&delta, theta);
    Ok(Check::with_slack(lhs, rhs, LEMMA1_SLACK * (1.0 + rhs.abs())))
}
