//! Seeded generator for regression problems with a planted sparse, low-rank
//! coefficient matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal, StandardNormal};

use crate::error::{invalid, Result};
use crate::types::{Matrix, ProblemInstance};

/// Planted model behind a generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub theta_star: Matrix,
    /// Noise-free responses `G_X Θ*`.
    pub f_true: Matrix,
    pub sigma_w: f64,
    pub rank_star: usize,
    pub support_frac: f64,
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Draws `G_X` (`n x h`, standard normal), `Θ* = (A Bᵀ) ∘ M` with standard
/// normal `A` (`h x rank_star`), `B` (`k x rank_star`) and a Bernoulli
/// (`support_frac`) mask `M`, and `Y = G_X Θ* + W` with `W ~ N(0, σ_w²)`.
///
/// Masking happens after the product, so `Θ*` has rank at most `rank_star`
/// only when `support_frac = 1`. The same seed yields bitwise identical
/// output.
pub fn generate_synthetic(
    n: usize,
    h: usize,
    k: usize,
    rank_star: usize,
    support_frac: f64,
    sigma_w: f64,
    seed: u64,
) -> Result<(ProblemInstance, SyntheticTruth)> {
    if n == 0 || h == 0 || k == 0 {
        return Err(invalid("n, h, k", "must all be >= 1"));
    }
    if rank_star > h.min(k) {
        return Err(invalid("rank_star", "must not exceed min(h, k)"));
    }
    if !(support_frac > 0.0 && support_frac <= 1.0) {
        return Err(invalid("support_frac", "must lie in (0, 1]"));
    }
    if !(sigma_w.is_finite() && sigma_w >= 0.0) {
        return Err(invalid("sigma_w", "must be finite and >= 0"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gx = gaussian(n, h, &mut rng);
    let a = gaussian(h, rank_star, &mut rng);
    let b = gaussian(k, rank_star, &mut rng);
    let mut theta_star = a * b.transpose();
    if support_frac < 1.0 {
        let mask = Bernoulli::new(support_frac).map_err(|_| invalid("support_frac", "must lie in (0, 1]"))?;
        for x in theta_star.iter_mut() {
            if !mask.sample(&mut rng) {
                *x = 0.0;
            }
        }
    }
    let f_true = &gx * &theta_star;
    let y = if sigma_w > 0.0 {
        let noise = Normal::new(0.0, sigma_w).map_err(|_| invalid("sigma_w", "must be finite and >= 0"))?;
        &f_true + Matrix::from_fn(n, k, |_, _| noise.sample(&mut rng))
    } else {
        f_true.clone()
    };
    let p = ProblemInstance::new(gx, y)?;
    Ok((
        p,
        SyntheticTruth {
            theta_star,
            f_true,
            sigma_w,
            rank_star,
            support_frac,
        },
    ))
}
