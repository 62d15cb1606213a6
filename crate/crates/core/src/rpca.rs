//! Robust PCA (principal component pursuit) by the inexact augmented Lagrange
//! multiplier method:
//!
//! ```text
//! minimize ‖L‖* + λ‖S‖₁  s.t.  M = L + S
//! ```

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{singular_value_threshold, soft_threshold, svd};

const MU_GROWTH: f64 = 1.5;
const MU_SPAN: f64 = 1e7;

#[derive(Debug, Clone)]
pub struct RpcaResult {
    pub l: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub iterations: usize,
    /// `‖M - L - S‖_F / ‖M‖_F` after each iteration.
    pub residual_history: Vec<f64>,
}

/// The usual weight `1/sqrt(max(rows, cols))`.
pub fn rpca_default_lambda(rows: usize, cols: usize) -> f64 {
    1.0 / (rows.max(cols) as f64).sqrt()
}

pub fn rpca_solve(m: &DMatrix<f64>, lambda: f64, epsilon: f64, max_iter: usize) -> Result<RpcaResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    if max_iter == 0 {
        return Err(Error::param("max_iter", "must be >= 1"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("M has non-finite entries".into()));
    }
    let (rows, cols) = m.shape();
    let m_norm = m.norm();
    if m_norm == 0.0 {
        return Ok(RpcaResult {
            l: DMatrix::zeros(rows, cols),
            s: DMatrix::zeros(rows, cols),
            iterations: 0,
            residual_history: vec![0.0],
        });
    }

    let spectral = svd(m)?.singular_values[0];
    let dual_scale = spectral.max(m.amax() / lambda);
    let mut y = m / dual_scale;
    let mut mu = 1.25 / spectral;
    let mu_bar = mu * MU_SPAN;
    let mut l = DMatrix::zeros(rows, cols);
    let mut s = DMatrix::zeros(rows, cols);
    let mut residual_history = Vec::new();

    for k in 1..=max_iter {
        let inv_mu = 1.0 / mu;
        l = singular_value_threshold(&(m - &s + &y * inv_mu), inv_mu)?;
        let thresh = lambda * inv_mu;
        s = (m - &l + &y * inv_mu).map(|v| soft_threshold(v, thresh));
        let z = m - &l - &s;
        y += &z * mu;
        mu = (mu * MU_GROWTH).min(mu_bar);
        let r = z.norm() / m_norm;
        residual_history.push(r);
        if r < epsilon {
            return Ok(RpcaResult {
                l,
                s,
                iterations: k,
                residual_history,
            });
        }
    }
    Ok(RpcaResult {
        l,
        s,
        iterations: max_iter,
        residual_history,
    })
}
