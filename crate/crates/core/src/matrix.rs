//! Dense symmetric matrices and the proximal kernels built on them.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues below this magnitude on the negative side are roundoff, not a
/// sign of an indefinite matrix.
pub const PSD_CLIP: f64 = 1e-10;

const SIGN_EPS: f64 = 1e-12;

/// A dense `p x p` real symmetric matrix.
///
/// Every constructor replaces `A` by `(A + A^T) / 2`, so `a[(i, j)] == a[(j, i)]`
/// holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Symmetrizes `m`, rejecting non-square or non-finite input.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("matrix has dimension 0".into()));
        }
        if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
            let p = m.nrows();
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos % p,
                pos / p
            )));
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetrizes without the finiteness check. Internal arithmetic on finite
    /// operands goes through here.
    pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        debug_assert_eq!(p, m.ncols());
        for j in 0..p {
            for i in (j + 1)..p {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn from_row_slice(p: usize, data: &[f64]) -> Result<Self> {
        if data.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", p * p),
                found: format!("{} entries", data.len()),
            });
        }
        Self::new(DMatrix::from_row_slice(p, p, data))
    }

    pub fn from_fn(p: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(p, p, f))
    }

    pub fn zeros(p: usize) -> Self {
        SymMatrix(DMatrix::zeros(p, p))
    }

    pub fn identity(p: usize) -> Self {
        SymMatrix(DMatrix::identity(p, p))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Number of entries with `|a_ij| > tol`, counting both triangles.
    pub fn count_nonzero(&self, tol: f64) -> usize {
        self.0.iter().filter(|v| v.abs() > tol).count()
    }

    pub fn scale(&self, a: f64) -> Self {
        SymMatrix(&self.0 * a)
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        Self::symmetrize(self.0.map(f))
    }

    /// `a*self + b*other`, computed entrywise.
    pub fn axpby(&self, a: f64, other: &SymMatrix, b: f64) -> Self {
        SymMatrix(self.0.zip_map(&other.0, |x, y| a * x + b * y))
    }

    /// `||self - other||_F`.
    pub fn distance(&self, other: &SymMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Inverse via Cholesky, falling back to LU for indefinite input.
    pub fn inverse(&self) -> Result<Self> {
        if let Some(ch) = self.0.clone().cholesky() {
            return Ok(Self::symmetrize(ch.inverse()));
        }
        self.0
            .clone()
            .try_inverse()
            .map(Self::symmetrize)
            .ok_or_else(|| Error::InvalidInput("matrix is singular".into()))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*sym_eigen(self)?.values.last().expect("dimension is positive"))
    }
}

impl TryFrom<DMatrix<f64>> for SymMatrix {
    type Error = Error;
    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        SymMatrix::new(m)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: format!("rows of length {p}"),
                found: format!("a row of length {}", bad.len()),
            });
        }
        Self::from_row_slice(p, &rows.concat())
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(s: SymMatrix) -> Self {
        s.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl From<SymMatrix> for DMatrix<f64> {
    fn from(s: SymMatrix) -> Self {
        s.0
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix(-&self.0)
    }
}

/// Eigendecomposition `A = Q diag(D) Q^T` with descending `D`.
///
/// Each eigenvector is sign-normalized so its first component larger than
/// `1e-12` in magnitude is positive.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

impl EigenPair {
    /// `Q diag(f(d)) Q^T`, skipping eigenvalues mapped to exactly zero.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let p = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&d| f(d)).collect();
        let keep: Vec<usize> = (0..p).filter(|&k| mapped[k] != 0.0).collect();
        if keep.is_empty() {
            return SymMatrix::zeros(p);
        }
        let q = self.vectors.select_columns(&keep);
        let mut qd = q.clone();
        for (c, &k) in keep.iter().enumerate() {
            qd.column_mut(c).scale_mut(mapped[k]);
        }
        SymMatrix::symmetrize(qd * q.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|d| d)
    }
}

pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

pub fn soft_threshold_matrix(a: &SymMatrix, tau: f64) -> SymMatrix {
    SymMatrix(a.0.map(|x| soft_threshold(x, tau)))
}

pub fn sym_eigen(a: &SymMatrix) -> Result<EigenPair> {
    let p = a.dim();
    let eig = SymmetricEigen::try_new(a.0.clone(), f64::EPSILON, 200 * p.max(10)).ok_or(
        Error::EigenFailure {
            dim: p,
            max_abs: a.max_abs(),
            frobenius: a.frobenius(),
        },
    )?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure {
            dim: p,
            max_abs: a.max_abs(),
            frobenius: a.frobenius(),
        });
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(p, p);
    let mut values = Vec::with_capacity(p);
    for (c, &k) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(k).clone_owned();
        if let Some(first) = col.iter().find(|v| v.abs() > SIGN_EPS) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(c, &col);
        values.push(eig.eigenvalues[k]);
    }
    Ok(EigenPair { vectors, values })
}

/// Frobenius-nearest positive semidefinite matrix.
pub fn project_psd(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(a)?;
    Ok(eig.reconstruct_with(|d| if d > 0.0 { d } else { 0.0 }))
}

/// One eigenvalue of the log-det prox: the positive root of `mu t^2 - d t - 1 = 0`.
pub fn log_det_prox_scalar(d: f64, mu: f64) -> f64 {
    let s = (d * d + 4.0 * mu).sqrt();
    if d >= 0.0 {
        (d + s) / (2.0 * mu)
    } else {
        // Same root, without the cancellation in d + s.
        2.0 / (s - d)
    }
}

/// `argmin_T -log det T + (mu/2) ||T - W/mu||_F^2`, i.e. the SPD solution of
/// `mu T - T^{-1} = W`.
pub fn log_det_prox(w: &SymMatrix, mu: f64) -> Result<SymMatrix> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be positive and finite, got {mu}")));
    }
    let eig = sym_eigen(w)?;
    Ok(eig.reconstruct_with(|d| log_det_prox_scalar(d, mu)))
}

/// Thin SVD with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

impl Svd {
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> DMatrix<f64> {
        let mapped: Vec<f64> = self.singular_values.iter().map(|&s| f(s)).collect();
        let keep: Vec<usize> = (0..mapped.len()).filter(|&k| mapped[k] != 0.0).collect();
        if keep.is_empty() {
            return DMatrix::zeros(self.u.nrows(), self.v_t.ncols());
        }
        let mut us = self.u.select_columns(&keep);
        for (c, &k) in keep.iter().enumerate() {
            us.column_mut(c).scale_mut(mapped[k]);
        }
        us * self.v_t.select_rows(&keep)
    }
}

pub fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    let (rows, cols) = a.shape();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in svd input".into()));
    }
    let dec = SVD::try_new(a.clone(), true, true, f64::EPSILON, 200 * rows.max(cols).max(10))
        .ok_or(Error::SvdFailure { rows, cols })?;
    let (u, v_t) = match (dec.u, dec.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SvdFailure { rows, cols }),
    };
    let singular_values: Vec<f64> = dec.singular_values.iter().copied().collect();
    // nalgebra skips sorting for some tiny fixed shapes; sort defensively.
    let mut order: Vec<usize> = (0..singular_values.len()).collect();
    order.sort_by(|&i, &j| singular_values[j].total_cmp(&singular_values[i]));
    if order.iter().enumerate().all(|(c, &k)| c == k) {
        return Ok(Svd { u, singular_values, v_t });
    }
    Ok(Svd {
        u: u.select_columns(&order),
        singular_values: order.iter().map(|&k| singular_values[k]).collect(),
        v_t: v_t.select_rows(&order),
    })
}

/// Proximal map of `tau * ||X||_*`.
pub fn singular_value_threshold(a: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    if tau < 0.0 {
        return Err(Error::param("tau", format!("must be nonnegative, got {tau}")));
    }
    Ok(svd(a)?.reconstruct_with(|s| soft_threshold(s, tau)))
}
