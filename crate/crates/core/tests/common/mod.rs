//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rglasso::SymMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale))
}

pub fn random_sym(rng: &mut impl Rng, p: usize, scale: f64) -> SymMatrix {
    SymMatrix::new(random_matrix(rng, p, p, scale)).unwrap()
}

/// `B Bᵀ + shift I`.
pub fn random_spd(rng: &mut impl Rng, p: usize, shift: f64) -> SymMatrix {
    let b = random_matrix(rng, p, p, 1.0);
    SymMatrix::new(&b * b.transpose() + DMatrix::identity(p, p) * shift).unwrap()
}

/// Random orthogonal matrix from Gram-Schmidt on a random square.
pub fn random_orthogonal(rng: &mut impl Rng, p: usize) -> DMatrix<f64> {
    let mut q = random_matrix(rng, p, p, 1.0);
    for j in 0..p {
        for k in 0..j {
            let d = q.column(j).dot(&q.column(k));
            let qk = q.column(k).clone_owned();
            q.column_mut(j).axpy(-d, &qk, 1.0);
        }
        let n = q.column(j).norm();
        q.column_mut(j).scale_mut(1.0 / n);
    }
    q
}

/// Minimizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Number of eigenvalues of `a` below `sigma`, from the signs of the LDLᵀ
/// pivots of `a - sigma I`.
pub fn count_below(a: &DMatrix<f64>, sigma: f64) -> usize {
    let p = a.nrows();
    let mut w = a.clone() - DMatrix::identity(p, p) * sigma;
    let mut negatives = 0;
    for k in 0..p {
        let mut pivot = w[(k, k)];
        if pivot == 0.0 {
            pivot = -1e-300;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in k + 1..p {
            let l = w[(i, k)] / pivot;
            for j in k + 1..p {
                w[(i, j)] -= l * w[(k, j)];
            }
        }
    }
    negatives
}

/// Eigenvalues in descending order by bisection on the inertia count.
pub fn bisection_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let p = a.nrows();
    let bound = a.norm() + 1.0;
    let mut out: Vec<f64> = (0..p)
        .map(|k| {
            // the (k+1)-th smallest eigenvalue
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    out.reverse();
    out
}

/// Nearest PSD matrix to `a` by gradient descent on `L Lᵀ`.
pub fn nearest_psd_by_descent(a: &DMatrix<f64>) -> DMatrix<f64> {
    let p = a.nrows();
    let scale = a.norm().max(1.0);
    let mut l = DMatrix::identity(p, p) * scale.sqrt();
    let step = 0.05 / scale;
    for _ in 0..200_000 {
        let r = &l * l.transpose() - a;
        let grad = (&r * &l) * 4.0;
        if grad.norm() < 1e-13 * scale {
            break;
        }
        l -= grad * step;
    }
    &l * l.transpose()
}

/// Minimizer of `tau ‖X‖* + ½‖X - A‖²` through the factorization
/// `‖X‖* = min over X = U Vᵀ of (‖U‖² + ‖V‖²)/2`.
pub fn svt_by_factorization(a: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let r = m.min(n);
    let mut u = DMatrix::from_fn(m, r, |i, j| if i == j { 1.0 } else { 0.1 / (1 + i + j) as f64 });
    let mut v = DMatrix::from_fn(n, r, |i, j| if i == j { 1.0 } else { -0.1 / (1 + i + j) as f64 });
    let step = 0.02;
    for _ in 0..400_000 {
        let resid = &u * v.transpose() - a;
        let gu = &resid * &v + &u * tau;
        let gv = resid.transpose() * &u + &v * tau;
        if gu.norm() + gv.norm() < 1e-13 {
            break;
        }
        u -= gu * step;
        v -= gv * step;
    }
    &u * v.transpose()
}

/// Inverse of a 3×3 matrix by cofactors.
pub fn cofactor_inverse3(a: &DMatrix<f64>) -> DMatrix<f64> {
    let c = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let s: Vec<usize> = (0..3).filter(|&x| x != j).collect();
        let minor = a[(r[0], s[0])] * a[(r[1], s[1])] - a[(r[0], s[1])] * a[(r[1], s[0])];
        if (i + j).is_multiple_of(2) { minor } else { -minor }
    };
    let det: f64 = (0..3).map(|j| a[(0, j)] * c(0, j)).sum();
    DMatrix::from_fn(3, 3, |i, j| c(j, i) / det)
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
