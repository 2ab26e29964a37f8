//! Thin-SVD helpers shared by the objective, proximal and theory modules.

use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::types::Matrix;

/// Singular values below `RANK_RTOL * sigma_max` count as zero in every rank
/// decision made by the crate.
pub const RANK_RTOL: f64 = 1e-12;

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Reduced SVD `m = U diag(sigma) Vᵀ` with `min(rows, cols)` components,
/// singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Matrix,
    pub sigma: DVector<f64>,
    pub v_t: Matrix,
}

impl ThinSvd {
    pub fn new(m: &Matrix) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Ok(Self {
                u: Matrix::zeros(rows, 0),
                sigma: DVector::zeros(0),
                v_t: Matrix::zeros(0, cols),
            });
        }
        let svd = to_faer(m).thin_svd().map_err(|_| Error::SvdFailed { rows, cols })?;
        let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
        let r = rows.min(cols);
        let out = Self {
            u: Matrix::from_fn(rows, r, |i, j| u[(i, j)]),
            sigma: DVector::from_fn(r, |i, _| s[i]),
            v_t: Matrix::from_fn(r, cols, |i, j| v[(j, i)]),
        };
        if out.sigma.iter().any(|x| !x.is_finite()) {
            return Err(Error::SvdFailed { rows, cols });
        }
        debug_assert!(out.sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
        debug_assert!((out.recompose_with(|s| s) - m).norm() <= 1e-10 * (1.0 + m.norm()));
        Ok(out)
    }

    /// Numerical rank under the global relative tolerance.
    pub fn rank(&self) -> usize {
        let tol = rank_threshold(self.sigma.as_slice());
        self.sigma.iter().filter(|&&s| s > tol).count()
    }

    /// Rebuilds `U diag(f(sigma_i)) Vᵀ`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let mut scaled_u = self.u.clone();
        for (j, mut col) in scaled_u.column_iter_mut().enumerate() {
            col *= f(self.sigma[j]);
        }
        scaled_u * &self.v_t
    }

    /// First `r` left singular vectors.
    pub fn u_r(&self, r: usize) -> Matrix {
        self.u.columns(0, r).into_owned()
    }

    /// First `r` right singular vectors, as columns.
    pub fn v_r(&self, r: usize) -> Matrix {
        self.v_t.rows(0, r).transpose()
    }
}

/// Absolute threshold below which a singular value is treated as zero.
pub fn rank_threshold(sigma: &[f64]) -> f64 {
    let max = sigma.iter().copied().fold(0.0_f64, f64::max);
    RANK_RTOL * max
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    let sigma = to_faer(m)
        .singular_values()
        .map_err(|_| Error::SvdFailed { rows, cols })?;
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailed { rows, cols });
    }
    Ok(sigma)
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Numerical rank of `m`.
pub fn rank(m: &Matrix) -> Result<usize> {
    let sigma = singular_values(m)?;
    let tol = rank_threshold(&sigma);
    Ok(sigma.iter().filter(|&&s| s > tol).count())
}

/// Frobenius inner product `<a, b>`.
pub fn inner(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
