//! Defaults, then the `--config` file, then command-line flags.

use std::path::Path;
use std::str::FromStr;

use rglasso::bench::BenchConfig;
use rglasso::par::Execution;
use rglasso::{Error, IngestError, SolverConfig};
use serde::Deserialize;

use crate::{GridFlags, ListArg, SolverFlags};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub solver: SolverConfig,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub sigma2: Option<f64>,
    pub density: Option<f64>,
    pub support_tol_rel: Option<f64>,
    pub threads: Option<usize>,
    pub sequential: Option<bool>,
    pub timing: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::Unreadable {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("config {}: {e}", path.display())))
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(1)
    }
}

pub fn solver_config(file: &ConfigFile, flags: &SolverFlags) -> Result<SolverConfig, Error> {
    let mut c = file.solver.clone();
    if let Some(v) = flags.rho {
        c.rho = v;
    }
    if let Some(v) = flags.lambda {
        c.lambda = v;
    }
    if let Some(v) = flags.epsilon {
        c.epsilon = v;
    }
    if let Some(v) = flags.max_iter {
        c.max_iter = v;
    }
    if let Some(v) = flags.beta {
        c.beta = v;
    }
    if let Some(v) = flags.mu1 {
        c.mu1_init = v;
    }
    if let Some(v) = flags.mu2 {
        c.mu2_init = v;
    }
    if flags.mu_max.is_some() {
        c.mu_max = flags.mu_max;
    }
    c.validate()?;
    Ok(c)
}

pub fn bench_config(file: &ConfigFile, solver: SolverConfig, grid: &GridFlags) -> BenchConfig {
    let mut b = BenchConfig {
        solver,
        ..BenchConfig::default()
    };
    if let Some(v) = grid.support_tol_rel.or(file.support_tol_rel) {
        b.support_tol_rel = v;
    }
    let sequential = grid.sequential || (grid.threads.is_none() && file.sequential.unwrap_or(false));
    b.execution = match (sequential, grid.threads.or(file.threads)) {
        (true, _) => Execution::Sequential,
        (false, Some(t)) => Execution::ParallelWith { threads: t },
        (false, None) => Execution::Parallel,
    };
    b.record_timing = grid.timing || file.timing.unwrap_or(false);
    b
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<ListArg<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<Vec<T>, String>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(ListArg(items))
}
