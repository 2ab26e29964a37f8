//! Independent reference routines for the integration tests.
//!
//! Nothing here calls into the SVD-based code paths of the crate: spectral
//! quantities go through a symmetric eigensolver on `MᵀM`, scalar problems
//! through direct search.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Matrix = DMatrix<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Eigen-decomposition of `MᵀM`: returns (eigenvalues clamped at 0, V).
fn gram_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(m.transpose() * m);
    let vals = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    (vals, eig.eigenvectors)
}

/// Singular values as square roots of the eigenvalues of the smaller of
/// `MᵀM` and `MMᵀ` (descending), so no spurious zero eigenvalues appear.
pub fn singular_values_eig(m: &Matrix) -> Vec<f64> {
    let (vals, _) = if m.nrows() < m.ncols() {
        gram_eigen(&m.transpose())
    } else {
        gram_eigen(m)
    };
    let mut s: Vec<f64> = vals.iter().map(|l| l.sqrt()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn trace_norm_eig(m: &Matrix) -> f64 {
    singular_values_eig(m).iter().sum()
}

/// `M · f(MᵀM)` where the spectral function acts on singular values:
/// `M V diag(g(σ)/σ) Vᵀ`.
fn spectral_map(m: &Matrix, g: impl Fn(f64) -> f64) -> Matrix {
    let (vals, v) = gram_eigen(m);
    let scale: Vec<f64> = vals
        .iter()
        .map(|&l| {
            let s = l.sqrt();
            if s == 0.0 {
                0.0
            } else {
                g(s) / s
            }
        })
        .collect();
    let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(scale));
    m * (&v * d * v.transpose())
}

/// Singular value thresholding through the eigen route.
pub fn svt_eig(m: &Matrix, tau: f64) -> Matrix {
    spectral_map(m, |s| (s - tau).max(0.0))
}

/// Spectral-ball projection through the eigen route.
pub fn project_spectral_eig(m: &Matrix) -> Matrix {
    spectral_map(m, |s| s.min(1.0))
}

pub fn soft_threshold_ref(m: &Matrix, tau: f64) -> Matrix {
    m.map(|x| x.signum() * (x.abs() - tau).max(0.0))
}

/// Golden-section minimization of a unimodal scalar function on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi]
        .into_iter()
        .min_by(|x, y| f(*x).partial_cmp(&f(*y)).unwrap())
        .unwrap()
}

/// `‖Θ − Φ̂‖² + α̂‖Θ‖_* + β̂‖Θ‖₁` evaluated with the eigen-route trace norm.
pub fn prox_objective_ref(theta: &Matrix, phi: &Matrix, ah: f64, bh: f64) -> f64 {
    (theta - phi).norm_squared() + ah * trace_norm_eig(theta) + bh * theta.abs().sum()
}

/// Douglas–Rachford splitting for `min ‖Θ − Φ̂‖² + β̂‖Θ‖₁ + α̂‖Θ‖_*`.
///
/// `f = ‖Θ − Φ̂‖² + β̂‖Θ‖₁` and `g = α̂‖Θ‖_*`, both with closed-form proximal
/// maps (soft thresholding and eigen-route SVT). Returns the minimizer.
pub fn douglas_rachford_prox(phi: &Matrix, ah: f64, bh: f64, max_iter: usize) -> Matrix {
    let t = 0.5;
    let mut z = phi.clone();
    let mut x = phi.clone();
    for _ in 0..max_iter {
        // prox_{t f}(z) = soft((2Φ̂ + z/t) / (2 + 1/t), β̂ / (2 + 1/t))
        let c = 2.0 + 1.0 / t;
        x = soft_threshold_ref(&((phi * 2.0 + &z / t) / c), bh / c);
        let y = svt_eig(&(&x * 2.0 - &z), t * ah);
        let step = &y - &x;
        z += &step;
        if step.norm() <= 1e-15 * (1.0 + phi.norm()) {
            break;
        }
    }
    x
}

/// Central finite-difference gradient of `f` at `x`.
pub fn finite_diff(f: impl Fn(&Matrix) -> f64, x: &Matrix, step: f64) -> Matrix {
    let mut g = Matrix::zeros(x.nrows(), x.ncols());
    for c in 0..x.ncols() {
        for r in 0..x.nrows() {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[(r, c)] += step;
            minus[(r, c)] -= step;
            g[(r, c)] = (f(&plus) - f(&minus)) / (2.0 * step);
        }
    }
    g
}

/// Accelerated projected gradient jointly over both dual blocks of
/// `min ‖α̂L + β̂S − 2Φ̂‖²` with `‖L‖₂ ≤ 1`, `‖S‖_∞ ≤ 1`.
///
/// Projections use the eigen route for the spectral ball and clamping for
/// the ℓ∞ ball. Returns the attained dual objective.
pub fn joint_projected_gradient_dual(phi: &Matrix, ah: f64, bh: f64, iters: usize) -> f64 {
    let (r, c) = phi.shape();
    let two_phi = phi * 2.0;
    let dual_obj = |l: &Matrix, s: &Matrix| (l * ah + s * bh - &two_phi).norm_squared();
    let lip = 2.0 * (ah * ah + bh * bh);
    let step = 1.0 / lip;
    let (mut l, mut s) = (Matrix::zeros(r, c), Matrix::zeros(r, c));
    let (mut yl, mut ys) = (l.clone(), s.clone());
    let mut t = 1.0_f64;
    let mut best = dual_obj(&l, &s);
    for _ in 0..iters {
        let resid = &yl * ah + &ys * bh - &two_phi;
        let gl = &resid * (2.0 * ah);
        let gs = &resid * (2.0 * bh);
        let l_new = project_spectral_eig(&(&yl - gl * step));
        let s_new = (&ys - gs * step).map(|x| x.clamp(-1.0, 1.0));
        let t_new = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let mom = (t - 1.0) / t_new;
        yl = &l_new + (&l_new - &l) * mom;
        ys = &s_new + (&s_new - &s) * mom;
        l = l_new;
        s = s_new;
        t = t_new;
        best = best.min(dual_obj(&l, &s));
    }
    best
}

/// Random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    gaussian(n, n, rng).qr().q()
}

/// Proximal gradient with constant step `1/L` on
/// `‖G Θ − Y‖²/N + α‖Θ‖_* + β‖Θ‖₁` where at most one weight is nonzero,
/// so the proximal map is a single closed form. Runs until the iterate
/// stops moving.
pub fn ista_single_norm(gx: &Matrix, y: &Matrix, alpha: f64, beta: f64, max_iter: usize) -> Matrix {
    assert!(alpha == 0.0 || beta == 0.0);
    let big_n = (y.nrows() * y.ncols()) as f64;
    let lip = 2.0 * singular_values_eig(gx)[0].powi(2) / big_n;
    let step = 1.0 / lip;
    let mut theta = Matrix::zeros(gx.ncols(), y.ncols());
    for _ in 0..max_iter {
        let grad = gx.transpose() * (gx * &theta - y) * (2.0 / big_n);
        let fwd = &theta - grad * step;
        let next = if alpha > 0.0 {
            svt_eig(&fwd, alpha * step)
        } else {
            soft_threshold_ref(&fwd, beta * step)
        };
        let moved = (&next - &theta).norm();
        theta = next;
        if moved <= 1e-15 * (1.0 + theta.norm()) {
            break;
        }
    }
    theta
}

/// `‖G Θ − Y‖²/N + α‖Θ‖_* + β‖Θ‖₁` through the eigen-route trace norm.
pub fn objective_ref(gx: &Matrix, y: &Matrix, theta: &Matrix, alpha: f64, beta: f64) -> f64 {
    let big_n = (y.nrows() * y.ncols()) as f64;
    (gx * theta - y).norm_squared() / big_n + alpha * trace_norm_eig(theta) + beta * theta.abs().sum()
}
