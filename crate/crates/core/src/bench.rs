//! Sweep harness over synthetic contaminated covariances.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::par::{map_cells, Execution};
use crate::rpca::{rpca_default_lambda, rpca_solve};
use crate::score::{f1_support_score, relative_support_tol, F1Report};
use crate::solver::{rglasso_solve, SolverConfig, Termination};
use crate::synth::{
    make_anomaly_matrix, make_contaminated_covariance, make_information_matrix, AnomalySpec, CovarianceMode,
    StructureKind, StructureSpec,
};

/// Support tolerance used when scoring benchmark cells, relative to
/// `max(1, max|S|)`. Once the penalties have grown large the `S`-shrinkage
/// threshold is tiny, so `S` keeps residual entries around `1e-5` that are not
/// detections.
pub const BENCH_SUPPORT_TOL_REL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// Base solver settings; `rho` and `lambda` are overridden per cell.
    pub solver: SolverConfig,
    pub support_tol_rel: f64,
    pub execution: Execution,
    /// Fill the `wall_time` column. Off by default so record files are
    /// reproducible byte for byte.
    pub record_timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            support_tol_rel: BENCH_SUPPORT_TOL_REL,
            execution: Execution::default(),
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed,
}

/// One solved grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub structure: u8,
    pub p: usize,
    pub n: Option<usize>,
    pub mode: String,
    pub mu: f64,
    pub lambda: f64,
    pub rho: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub iterations: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub termination: String,
    pub status: CellStatus,
    pub error: String,
    pub wall_time: Option<f64>,
}

/// Ground truth and contaminated covariance for one benchmark instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub structure: StructureSpec,
    pub anomaly: AnomalySpec,
    pub mode: CovarianceMode,
    pub theta0: SymMatrix,
    pub s0: SymMatrix,
    pub m: SymMatrix,
}

impl Instance {
    pub fn generate(structure: &StructureSpec, anomaly: &AnomalySpec, mode: CovarianceMode) -> Result<Self> {
        let theta0 = make_information_matrix(structure)?;
        let s0 = make_anomaly_matrix(structure.p, anomaly)?;
        let m = make_contaminated_covariance(&theta0, &s0, mode)?;
        Ok(Self {
            structure: structure.clone(),
            anomaly: anomaly.clone(),
            mode,
            theta0,
            s0,
            m,
        })
    }

    fn blank_record(&self, lambda: f64, rho: f64) -> BenchRecord {
        blank_record(&self.structure, self.mode, self.anomaly.mu, lambda, rho)
    }

    /// Solves and scores one `(lambda, rho)` cell. Solver failures become a
    /// failed record.
    pub fn solve_cell(&self, lambda: f64, rho: f64, config: &BenchConfig) -> BenchRecord {
        let mut rec = self.blank_record(lambda, rho);
        let solver = SolverConfig {
            lambda,
            rho,
            ..config.solver.clone()
        };
        let start = Instant::now();
        let outcome = rglasso_solve(&self.m, &solver).and_then(|r| {
            let tol = relative_support_tol(&r.s, config.support_tol_rel);
            Ok((f1_support_score(&r.s, &self.s0, tol)?, r))
        });
        let elapsed = start.elapsed().as_secs_f64();
        match outcome {
            Ok((score, r)) => {
                fill_score(&mut rec, &score);
                rec.iterations = r.iterations;
                rec.delta1 = r.final_delta1();
                rec.delta2 = r.final_delta2();
                rec.termination = termination_name(r.termination).into();
                rec.status = CellStatus::Ok;
            }
            Err(e) => rec.error = e.to_string(),
        }
        if config.record_timing {
            rec.wall_time = Some(elapsed);
        }
        rec
    }
}

fn blank_record(structure: &StructureSpec, mode: CovarianceMode, mu: f64, lambda: f64, rho: f64) -> BenchRecord {
    BenchRecord {
        structure: structure.kind.number(),
        p: structure.p,
        n: mode.n(),
        mode: mode.name().to_string(),
        mu,
        lambda,
        rho,
        f1: 0.0,
        precision: 0.0,
        recall: 0.0,
        tp: 0,
        fp: 0,
        fn_: 0,
        iterations: 0,
        delta1: f64::NAN,
        delta2: f64::NAN,
        termination: String::new(),
        status: CellStatus::Failed,
        error: String::new(),
        wall_time: None,
    }
}

fn fill_score(rec: &mut BenchRecord, s: &F1Report) {
    rec.f1 = s.f1;
    rec.precision = s.precision;
    rec.recall = s.recall;
    rec.tp = s.true_positives;
    rec.fp = s.false_positives;
    rec.fn_ = s.false_negatives;
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max_iterations",
    }
}

fn nonempty(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param(name, "grid must not be empty"));
    }
    Ok(())
}

/// Solves every `(lambda, rho)` pair on one generated instance.
///
/// Records come out lambda-major, one per cell, failures included.
pub fn run_benchmark(
    structure: &StructureSpec,
    anomaly: &AnomalySpec,
    mode: CovarianceMode,
    lambda_grid: &[f64],
    rho_grid: &[f64],
    config: &BenchConfig,
) -> Result<Vec<BenchRecord>> {
    nonempty("lambda_grid", lambda_grid)?;
    nonempty("rho_grid", rho_grid)?;
    let inst = Instance::generate(structure, anomaly, mode)?;
    let cells: Vec<(f64, f64)> = lambda_grid
        .iter()
        .flat_map(|&l| rho_grid.iter().map(move |&r| (l, r)))
        .collect();
    Ok(map_cells(&cells, config.execution, |&(l, r)| inst.solve_cell(l, r, config)))
}

/// Fixed penalties for one structure in a magnitude sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTarget {
    pub structure: StructureSpec,
    pub lambda: f64,
    pub rho: f64,
}

/// Varies the anomaly mean with the penalties fixed per structure.
///
/// Every `mu` reuses the same seeds, so only the anomaly magnitude changes
/// between cells of one structure.
pub fn mu_sweep(
    targets: &[SweepTarget],
    anomaly: &AnomalySpec,
    mu_grid: &[f64],
    mode: CovarianceMode,
    config: &BenchConfig,
) -> Result<Vec<BenchRecord>> {
    nonempty("mu_grid", mu_grid)?;
    if targets.is_empty() {
        return Err(Error::param("structures", "at least one structure is required"));
    }
    let cells: Vec<(&SweepTarget, f64)> = targets
        .iter()
        .flat_map(|t| mu_grid.iter().map(move |&mu| (t, mu)))
        .collect();
    let out = map_cells(&cells, config.execution, |&(t, mu)| {
        let spec = AnomalySpec {
            mu,
            ..anomaly.clone()
        };
        match Instance::generate(&t.structure, &spec, mode) {
            Ok(inst) => inst.solve_cell(t.lambda, t.rho, config),
            Err(e) => {
                let mut rec = blank_record(&t.structure, mode, mu, t.lambda, t.rho);
                rec.error = e.to_string();
                rec
            }
        }
    });
    Ok(out)
}

/// Settings for the robust-PCA comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub structure: StructureKind,
    pub n: usize,
    pub mu: f64,
    pub seed: u64,
    pub lambda: f64,
    pub rho: f64,
    /// `None` uses `1/sqrt(p)`.
    pub rpca_lambda: Option<f64>,
    pub rpca_epsilon: f64,
    pub rpca_max_iter: usize,
    pub bench: BenchConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            structure: StructureKind::Tridiagonal,
            n: 10_000,
            mu: 1000.0,
            seed: 1,
            lambda: 20.0,
            rho: 0.05,
            rpca_lambda: None,
            rpca_epsilon: 1e-7,
            rpca_max_iter: 1000,
            bench: BenchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRecord {
    pub method: String,
    pub structure: u8,
    pub p: usize,
    pub n: usize,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub iterations: usize,
    pub status: CellStatus,
    pub error: String,
    pub wall_time: Option<f64>,
}

/// Robust graphical lasso against robust PCA on the same covariance, for each `p`.
///
/// With timing on, cells run one at a time so the measured times do not
/// compete for cores.
pub fn compare(p_grid: &[usize], config: &CompareConfig) -> Result<Vec<CompareRecord>> {
    if p_grid.is_empty() {
        return Err(Error::param("p_grid", "grid must not be empty"));
    }
    if config.n == 0 {
        return Err(Error::param("n", "sample size must be positive"));
    }
    let instances = p_grid
        .iter()
        .map(|&p| {
            Instance::generate(
                &StructureSpec::new(config.structure, p, config.seed),
                &AnomalySpec::new(config.mu, config.seed),
                CovarianceMode::Sampled {
                    n: config.n,
                    seed: config.seed,
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, bool)> = (0..instances.len()).flat_map(|k| [(k, false), (k, true)]).collect();
    let exec = if config.bench.record_timing {
        Execution::Sequential
    } else {
        config.bench.execution
    };
    Ok(map_cells(&cells, exec, |&(k, is_rpca)| {
        let inst = &instances[k];
        let p = inst.structure.p;
        let mut rec = CompareRecord {
            method: if is_rpca { "rpca" } else { "rglasso" }.into(),
            structure: inst.structure.kind.number(),
            p,
            n: config.n,
            f1: 0.0,
            precision: 0.0,
            recall: 0.0,
            iterations: 0,
            status: CellStatus::Failed,
            error: String::new(),
            wall_time: None,
        };
        let start = Instant::now();
        let outcome = if is_rpca {
            let lam = config.rpca_lambda.unwrap_or_else(|| rpca_default_lambda(p, p));
            rpca_solve(inst.m.as_matrix(), lam, config.rpca_epsilon, config.rpca_max_iter)
                .and_then(|r| Ok((SymMatrix::new(r.s)?, r.iterations)))
        } else {
            let solver = SolverConfig {
                lambda: config.lambda,
                rho: config.rho,
                ..config.bench.solver.clone()
            };
            rglasso_solve(&inst.m, &solver).map(|r| (r.s, r.iterations))
        };
        let elapsed = start.elapsed().as_secs_f64();
        match outcome.and_then(|(s, it)| {
            let tol = relative_support_tol(&s, config.bench.support_tol_rel);
            Ok((f1_support_score(&s, &inst.s0, tol)?, it))
        }) {
            Ok((score, it)) => {
                rec.f1 = score.f1;
                rec.precision = score.precision;
                rec.recall = score.recall;
                rec.iterations = it;
                rec.status = CellStatus::Ok;
            }
            Err(e) => rec.error = e.to_string(),
        }
        if config.bench.record_timing {
            rec.wall_time = Some(elapsed);
        }
        rec
    }))
}
