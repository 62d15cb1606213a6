use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Support-recovery scores over unordered off-diagonal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl F1Report {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
        let precision = ratio(tp, fp);
        let recall = ratio(tp, fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// Default support tolerance for a detected matrix: `1e-6 * max(1, max|S|)`.
pub fn default_support_tol(detected: &SymMatrix) -> f64 {
    relative_support_tol(detected, 1e-6)
}

/// `rel * max(1, max|S|)`.
pub fn relative_support_tol(detected: &SymMatrix, rel: f64) -> f64 {
    rel * detected.max_abs().max(1.0)
}

/// Compares `{(i,j): i<j, |detected_ij| > tol}` against the nonzero
/// off-diagonal pairs of `truth`.
pub fn f1_support_score(detected: &SymMatrix, truth: &SymMatrix, tol: f64) -> Result<F1Report> {
    if detected.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", truth.dim()),
            found: format!("{0}x{0}", detected.dim()),
        });
    }
    let p = truth.dim();
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for j in 0..p {
        for i in 0..j {
            let d = detected[(i, j)].abs() > tol;
            let t = truth[(i, j)] != 0.0;
            match (d, t) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    Ok(F1Report::from_counts(tp, fp, fn_))
}
