//! Ground-truth information matrices, planted anomalies and contaminated covariances.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{sym_eigen, SymMatrix};

// Independent streams of one seed, so changing how many draws one stage makes
// never shifts another.
pub(crate) const STREAM_STRUCTURE: u64 = 1;
pub(crate) const STREAM_ANOMALY: u64 = 2;
pub(crate) const STREAM_SAMPLES: u64 = 3;

/// Floor applied to the spectrum of `Σ0` before sampling from it.
pub const SAMPLING_EIGEN_FLOOR: f64 = 1e-6;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    /// Unit diagonal, 0.5 on the first off-diagonals.
    Tridiagonal,
    /// Tridiagonal plus 0.25 on the second off-diagonals.
    Pentadiagonal,
    /// Random symmetric support of a given density.
    RandomSparse,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [
        StructureKind::Tridiagonal,
        StructureKind::Pentadiagonal,
        StructureKind::RandomSparse,
    ];

    /// 1-based index used on the command line and in record files.
    pub fn number(self) -> u8 {
        match self {
            StructureKind::Tridiagonal => 1,
            StructureKind::Pentadiagonal => 2,
            StructureKind::RandomSparse => 3,
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for StructureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "tridiagonal" => Ok(StructureKind::Tridiagonal),
            "2" | "pentadiagonal" => Ok(StructureKind::Pentadiagonal),
            "3" | "random_sparse" | "random-sparse" | "randomsparse" => Ok(StructureKind::RandomSparse),
            other => Err(Error::param("structure", format!("unknown structure `{other}` (expected 1, 2 or 3)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub kind: StructureKind,
    pub p: usize,
    /// Fraction of off-diagonal pairs that are nonzero (random structure only).
    pub density: f64,
    pub seed: u64,
}

impl StructureSpec {
    pub fn new(kind: StructureKind, p: usize, seed: u64) -> Self {
        Self {
            kind,
            p,
            density: 0.05,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::param("p", format!("must be >= 2, got {}", self.p)));
        }
        if !(self.density > 0.0 && self.density < 1.0) {
            return Err(Error::param("density", format!("must lie in (0, 1), got {}", self.density)));
        }
        Ok(())
    }
}

/// Builds the ground-truth information matrix `Θ0`. The result is always SPD.
pub fn make_information_matrix(spec: &StructureSpec) -> Result<SymMatrix> {
    spec.validate()?;
    let p = spec.p;
    let mut t = DMatrix::<f64>::identity(p, p);
    match spec.kind {
        StructureKind::Tridiagonal | StructureKind::Pentadiagonal => {
            for i in 1..p {
                t[(i, i - 1)] = 0.5;
                t[(i - 1, i)] = 0.5;
            }
            if spec.kind == StructureKind::Pentadiagonal {
                for i in 2..p {
                    t[(i, i - 2)] = 0.25;
                    t[(i - 2, i)] = 0.25;
                }
            }
        }
        StructureKind::RandomSparse => {
            let pairs = p * (p - 1) / 2;
            let k = (spec.density * pairs as f64).round() as usize;
            if k == 0 || k > pairs {
                return Err(Error::param(
                    "density",
                    format!("density {} gives {k} nonzero pairs out of {pairs} at p = {p}", spec.density),
                ));
            }
            let mut rng = stream_rng(spec.seed, STREAM_STRUCTURE);
            let mut chosen = sample(&mut rng, pairs, k).into_vec();
            chosen.sort_unstable();
            for idx in chosen {
                let (i, j) = upper_pair(p, idx);
                let mag = rng.random_range(0.3..0.6);
                let v = if rng.random_bool(0.5) { mag } else { -mag };
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
            let lmin = SymMatrix::new(t.clone())?.min_eigenvalue()?;
            if lmin <= 0.0 {
                let shift = lmin.abs() + 0.05;
                for i in 0..p {
                    t[(i, i)] += shift;
                }
            }
            let d: Vec<f64> = (0..p).map(|i| t[(i, i)].sqrt()).collect();
            for j in 0..p {
                for i in 0..p {
                    t[(i, j)] /= d[i] * d[j];
                }
            }
        }
    }
    let theta = SymMatrix::new(t)?;
    let lmin = theta.min_eigenvalue()?;
    if lmin <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "generated information matrix is not positive definite (min eigenvalue {lmin:e})"
        )));
    }
    Ok(theta)
}

/// Maps a linear index over the strict upper triangle (row-major) to `(i, j)`.
fn upper_pair(p: usize, mut idx: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row_len = p - 1 - i;
        if idx < row_len {
            return (i, i + 1 + idx);
        }
        idx -= row_len;
        i += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub mu: f64,
    /// Variance of the anomaly magnitudes.
    pub sigma2: f64,
    /// Maximum nonzero entries per row, counting the diagonal when it is included.
    pub per_row_max: usize,
    /// Whether each anomalous variable also gets a diagonal anomaly entry.
    pub include_diagonal: bool,
    /// With `include_diagonal`, raise each clique's diagonal just enough that
    /// the clique block is positive semidefinite. `Θ0^{-1} + S0` is then
    /// positive definite and can be sampled without repair.
    pub psd_cliques: bool,
    pub seed: u64,
}

impl AnomalySpec {
    pub fn new(mu: f64, seed: u64) -> Self {
        Self {
            mu,
            sigma2: 10.0,
            per_row_max: 3,
            include_diagonal: true,
            psd_cliques: true,
            seed,
        }
    }

    /// Largest clique size allowed: every variable gets 1 or 2 partners.
    fn max_group(&self) -> usize {
        (self.per_row_max + 1)
            .saturating_sub(usize::from(self.include_diagonal))
            .min(3)
    }
}

/// Plants anomalies on small cliques.
///
/// The variables are shuffled and cut into groups of 2 or 3; every pair inside
/// a group is an anomaly, so each row has one or two off-diagonal nonzeros.
/// Values are i.i.d. `N(mu, sigma2)`, drawn group by group in a fixed order.
pub fn make_anomaly_matrix(p: usize, spec: &AnomalySpec) -> Result<SymMatrix> {
    if p < 2 {
        return Err(Error::param("p", format!("must be >= 2, got {p}")));
    }
    if !(spec.sigma2 > 0.0 && spec.sigma2.is_finite()) {
        return Err(Error::param("sigma2", format!("must be > 0, got {}", spec.sigma2)));
    }
    if !spec.mu.is_finite() {
        return Err(Error::param("mu", "must be finite"));
    }
    if spec.per_row_max < 1 {
        return Err(Error::param("per_row_max", "must be >= 1"));
    }
    let g_max = spec.max_group();
    if g_max < 2 {
        return Err(Error::param(
            "per_row_max",
            format!(
                "{} entries per row leaves no room for an off-diagonal partner",
                spec.per_row_max
            ),
        ));
    }
    if g_max == 2 && p % 2 == 1 {
        return Err(Error::param(
            "p",
            format!("pairs-only anomalies need an even number of variables, got {p}"),
        ));
    }

    let mut rng = stream_rng(spec.seed, STREAM_ANOMALY);
    let normal = Normal::new(spec.mu, spec.sigma2.sqrt()).expect("sigma2 validated");
    let mut order: Vec<usize> = (0..p).collect();
    for i in (1..p).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }

    let mut s = DMatrix::<f64>::zeros(p, p);
    let mut start = 0;
    while start < p {
        let rem = p - start;
        let g = if g_max == 2 {
            2
        } else {
            match rem {
                2 | 4 => 2,
                3 => 3,
                _ => {
                    if rng.random_bool(0.5) {
                        2
                    } else {
                        3
                    }
                }
            }
        };
        let group = &order[start..start + g];
        start += g;
        for a in 0..g {
            for b in (a + 1)..g {
                let v = normal.sample(&mut rng);
                s[(group[a], group[b])] = v;
                s[(group[b], group[a])] = v;
            }
        }
        if spec.include_diagonal {
            for &a in group {
                s[(a, a)] = normal.sample(&mut rng);
            }
            if spec.psd_cliques {
                let block = SymMatrix::from_fn(g, |x, y| s[(group[x], group[y])])?;
                let lmin = block.min_eigenvalue()?;
                if lmin < 0.0 {
                    for &a in group {
                        s[(a, a)] -= lmin;
                    }
                }
            }
        }
    }
    SymMatrix::new(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CovarianceMode {
    /// `M = Θ0^{-1} + S0`.
    Direct,
    /// Empirical covariance of `n` draws from `N(0, Θ0^{-1} + S0)`.
    Sampled { n: usize, seed: u64 },
}

impl CovarianceMode {
    pub fn n(&self) -> Option<usize> {
        match self {
            CovarianceMode::Direct => None,
            CovarianceMode::Sampled { n, .. } => Some(*n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CovarianceMode::Direct => "direct",
            CovarianceMode::Sampled { .. } => "sampled",
        }
    }
}

const SAMPLE_CHUNK: usize = 4096;

pub fn make_contaminated_covariance(theta0: &SymMatrix, s0: &SymMatrix, mode: CovarianceMode) -> Result<SymMatrix> {
    if theta0.dim() != s0.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", theta0.dim()),
            found: format!("{0}x{0}", s0.dim()),
        });
    }
    let p = theta0.dim();
    let chol = theta0
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("information matrix is not positive definite".into()))?;
    let sigma = SymMatrix::symmetrize(chol.inverse()).axpby(1.0, s0, 1.0);
    let (n, seed) = match mode {
        CovarianceMode::Direct => return Ok(sigma),
        CovarianceMode::Sampled { n, seed } => (n, seed),
    };
    if n == 0 {
        return Err(Error::param("n", "sample size must be positive"));
    }
    let repaired = sym_eigen(&sigma)?.reconstruct_with(|d| d.max(SAMPLING_EIGEN_FLOOR));
    let l = repaired
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("repaired covariance failed to factor".into()))?
        .unpack();

    let mut rng = stream_rng(seed, STREAM_SAMPLES);
    let mut acc = DMatrix::<f64>::zeros(p, p);
    let mut buf = Vec::with_capacity(p * SAMPLE_CHUNK);
    let mut done = 0;
    while done < n {
        let c = SAMPLE_CHUNK.min(n - done);
        buf.clear();
        // Column j of z is sample done + j.
        buf.extend((0..c * p).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
        let z = DMatrix::from_column_slice(p, c, &buf);
        let x = &l * z;
        acc.gemm(1.0, &x, &x.transpose(), 1.0);
        done += c;
    }
    acc /= n as f64;
    SymMatrix::new(acc)
}

/// Equal-width histogram of matrix entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn with_range(lo: f64, hi: f64, bins: usize) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|k| lo + w * k as f64).collect();
        edges[bins] = hi;
        Self {
            edges,
            counts: vec![0; bins],
        }
    }

    fn add(&mut self, v: f64) {
        let bins = self.counts.len();
        let lo = self.edges[0];
        let hi = self.edges[bins];
        if !(lo..=hi).contains(&v) {
            return;
        }
        let k = (((v - lo) / (hi - lo)) * bins as f64).floor() as usize;
        self.counts[k.min(bins - 1)] += 1;
    }

    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let bins = self.counts.len();
        if v < self.edges[0] || v > self.edges[bins] {
            return None;
        }
        let k = (((v - self.edges[0]) / (self.edges[bins] - self.edges[0])) * bins as f64).floor() as usize;
        Some(k.min(bins - 1))
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

fn entry_range(m: &SymMatrix) -> (f64, f64) {
    m.as_matrix()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Histogram of all `p^2` entries of `m` over their own range.
pub fn entry_distribution(m: &SymMatrix, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::param("bins", "must be positive"));
    }
    let (lo, hi) = entry_range(m);
    let mut h = Histogram::with_range(lo, hi, bins);
    m.as_matrix().iter().for_each(|&v| h.add(v));
    Ok(h)
}
