//! Synthetic asset returns with planted hidden co-movements, for exercising the
//! returns-to-graph pipeline end to end.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::synth::{make_information_matrix, stream_rng, StructureKind, StructureSpec};

use super::returns::ReturnsTable;

const STREAM_PAIRS: u64 = 11;
const STREAM_RETURNS: u64 = 12;

/// Tickers used to name fixture columns; the first eight are financials.
pub const TICKERS: [&str; 40] = [
    "MS", "C", "ALL", "GS", "JPM", "BAC", "WFC", "AXP", "AAPL", "MSFT", "AMZN", "GOOG", "META", "NVDA", "INTC",
    "CSCO", "ORCL", "IBM", "XOM", "CVX", "COP", "SLB", "PFE", "MRK", "JNJ", "ABT", "AMGN", "KO", "PEP", "WMT",
    "COST", "HD", "LOW", "MCD", "NKE", "DIS", "T", "VZ", "BA", "CAT",
];

pub const FINANCIALS: [&str; 8] = ["MS", "C", "ALL", "GS", "JPM", "BAC", "WFC", "AXP"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureSpec {
    pub assets: usize,
    pub rows: usize,
    pub hidden_pairs: usize,
    /// Variance of the shock shared by each hidden pair; the idiosyncratic
    /// returns have unit variance scale.
    pub shock_variance: f64,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            assets: 24,
            rows: 5000,
            hidden_pairs: 6,
            shock_variance: 200.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedReturns {
    pub table: ReturnsTable,
    /// Planted pairs by asset name, each ordered alphabetically.
    pub planted: Vec<(String, String)>,
}

/// Returns `r_t = x_t + sum over hidden pairs of h_t (e_a + e_b)`, where `x_t`
/// follows a tridiagonal Gaussian graphical model and each pair's shock
/// `h_t ~ N(0, shock_variance)` is independent.
pub fn make_planted_returns(spec: &FixtureSpec) -> Result<PlantedReturns> {
    let p = spec.assets;
    if !(2..=TICKERS.len()).contains(&p) {
        return Err(Error::param("assets", format!("must be in 2..={}, got {p}", TICKERS.len())));
    }
    if 2 * spec.hidden_pairs > p {
        return Err(Error::param(
            "hidden_pairs",
            format!("{} disjoint pairs do not fit in {p} assets", spec.hidden_pairs),
        ));
    }
    if spec.rows < 2 {
        return Err(Error::param("rows", "need at least 2 rows"));
    }
    if !(spec.shock_variance > 0.0 && spec.shock_variance.is_finite()) {
        return Err(Error::param("shock_variance", "must be positive"));
    }
    let names: Vec<String> = TICKERS[..p].iter().map(|s| s.to_string()).collect();

    let mut rng = stream_rng(spec.seed, STREAM_PAIRS);
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut rng);
    let pairs: Vec<(usize, usize)> = order
        .chunks_exact(2)
        .take(spec.hidden_pairs)
        .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
        .collect();

    let theta0 = make_information_matrix(&StructureSpec::new(StructureKind::Tridiagonal, p, spec.seed))?;
    let cov: SymMatrix = theta0.inverse()?;
    let l = cov
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("fixture covariance failed to factor".into()))?
        .unpack();

    let mut rng = stream_rng(spec.seed, STREAM_RETURNS);
    let shock_sd = spec.shock_variance.sqrt();
    let mut rows = Vec::with_capacity(spec.rows);
    let mut z = nalgebra::DVector::<f64>::zeros(p);
    for _ in 0..spec.rows {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let mut r: Vec<f64> = (&l * &z).iter().copied().collect();
        for &(a, b) in &pairs {
            let h: f64 = StandardNormal.sample(&mut rng);
            r[a] += shock_sd * h;
            r[b] += shock_sd * h;
        }
        rows.push(r);
    }
    let mut planted: Vec<(String, String)> = pairs
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (names[a].clone(), names[b].clone());
            if x <= y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect();
    planted.sort();
    Ok(PlantedReturns {
        table: ReturnsTable {
            asset_names: names,
            rows,
            dropped_rows: 0,
        },
        planted,
    })
}
