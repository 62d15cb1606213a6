use std::path::Path;

use rglasso::bench::{compare, mu_sweep, run_benchmark, CompareConfig, Instance, SweepTarget};
use rglasso::io::fixture::{make_planted_returns, FixtureSpec};
use rglasso::io::records::{render_records_csv, write_records, RunSummary};
use rglasso::io::{
    covariance_from_returns, extract_graph, load_returns_csv, read_matrix_csv, write_atomic, write_matrix_csv,
    GraphFormat, LoadOptions, ReturnsTable,
};
use rglasso::rpca::{rpca_default_lambda, rpca_solve};
use rglasso::score::default_support_tol;
use rglasso::synth::entry_distribution;
use rglasso::{rglasso_solve, AnomalySpec, CovarianceMode, Error, StructureKind, StructureSpec, SymMatrix};
use serde::Serialize;

use crate::config::{bench_config, solver_config, ConfigFile};
use crate::{Command, DataFlags, ExcludeMode, GraphArgs};

type Result<T> = std::result::Result<T, Error>;

pub fn run(cmd: Command, file: &ConfigFile) -> Result<()> {
    match cmd {
        Command::Solve(a) => {
            let config = solver_config(file, &a.solver)?;
            let (names, m) = match (&a.input, &a.returns) {
                (Some(p), _) => {
                    let f = read_matrix_csv(p)?;
                    (f.names, SymMatrix::new(f.matrix)?)
                }
                (None, Some(p)) => {
                    let t = load_returns(p)?;
                    (Some(t.asset_names.clone()), covariance_from_returns(&t)?)
                }
                (None, None) => unreachable!("clap requires one input"),
            };
            let r = rglasso_solve(&m, &config)?;
            let names = names.as_deref();
            write_matrix_csv(format!("{}F.csv", a.out_prefix), r.f.as_matrix(), names)?;
            write_matrix_csv(format!("{}S.csv", a.out_prefix), r.s.as_matrix(), names)?;
            write_matrix_csv(format!("{}theta.csv", a.out_prefix), r.theta.as_matrix(), names)?;
            let summary = RunSummary::new(&r, &config, default_support_tol(&r.s));
            write_atomic(format!("{}summary.json", a.out_prefix), summary.to_json()?.as_bytes())
        }
        Command::Bench(a) => {
            let kind: StructureKind = a.structure.parse()?;
            let seed = file.seed(a.data.seed);
            let structure = structure_spec(kind, &a.data, file, seed);
            let anomaly = anomaly_spec(a.mu, &a.data, file, seed);
            let mode = covariance_mode(&a.data, file, seed)?;
            let bench = bench_config(file, solver_config(file, &a.solver)?, &a.grid);
            let records = run_benchmark(&structure, &anomaly, mode, &a.lambda_grid.0, &a.rho_grid.0, &bench)?;
            write_records(&a.out, &records)
        }
        Command::SweepMu(a) => {
            let seed = file.seed(a.data.seed);
            let kinds = a
                .structures
                .0
                .iter()
                .map(|s| s.parse::<StructureKind>())
                .collect::<Result<Vec<_>>>()?;
            if a.lambdas.0.len() != kinds.len() {
                return Err(Error::param("lambdas", format!("need one lambda per structure ({})", kinds.len())));
            }
            let rhos = match a.rhos.0.len() {
                1 => vec![a.rhos.0[0]; kinds.len()],
                k if k == kinds.len() => a.rhos.0.clone(),
                _ => return Err(Error::param("rhos", "give one rho, or one per structure")),
            };
            let targets: Vec<SweepTarget> = kinds
                .iter()
                .zip(&a.lambdas.0)
                .zip(&rhos)
                .map(|((&k, &lambda), &rho)| SweepTarget {
                    structure: structure_spec(k, &a.data, file, seed),
                    lambda,
                    rho,
                })
                .collect();
            let anomaly = anomaly_spec(0.0, &a.data, file, seed);
            let mode = covariance_mode(&a.data, file, seed)?;
            let bench = bench_config(file, solver_config(file, &a.solver)?, &a.grid);
            let records = mu_sweep(&targets, &anomaly, &a.mu_grid.0, mode, &bench)?;
            write_records(&a.out, &records)
        }
        Command::Rpca(a) => {
            let m = read_matrix_csv(&a.input)?;
            let names = m.names.as_deref();
            let (rows, cols) = m.matrix.shape();
            let lambda = a.lambda.unwrap_or_else(|| rpca_default_lambda(rows, cols));
            let r = rpca_solve(&m.matrix, lambda, a.epsilon, a.max_iter)?;
            write_matrix_csv(format!("{}L.csv", a.out_prefix), &r.l, names)?;
            write_matrix_csv(format!("{}S.csv", a.out_prefix), &r.s, names)?;
            let summary = serde_json::json!({
                "rows": rows,
                "cols": cols,
                "lambda": lambda,
                "iterations": r.iterations,
                "residual_history": r.residual_history,
            });
            write_json(format!("{}summary.json", a.out_prefix), &summary)
        }
        Command::Compare(a) => {
            let defaults = CompareConfig::default();
            let mut solver = solver_config(file, &a.solver)?;
            solver.lambda = a.solver.lambda.unwrap_or(defaults.lambda);
            solver.rho = a.solver.rho.unwrap_or(defaults.rho);
            let config = CompareConfig {
                n: a.n,
                mu: a.mu,
                seed: file.seed(a.seed),
                lambda: solver.lambda,
                rho: solver.rho,
                rpca_lambda: a.rpca_lambda,
                bench: bench_config(file, solver, &a.grid),
                ..defaults
            };
            let records = compare(&a.p_grid.0, &config)?;
            write_records(&a.out, &records)
        }
        Command::Graph(a) => graph(a, file),
        Command::Fixture(a) => {
            let d = FixtureSpec::default();
            let spec = FixtureSpec {
                assets: a.assets.unwrap_or(d.assets),
                rows: a.rows.unwrap_or(d.rows),
                hidden_pairs: a.hidden_pairs.unwrap_or(d.hidden_pairs),
                shock_variance: a.shock_variance.unwrap_or(d.shock_variance),
                seed: a.seed.or(file.seed).unwrap_or(d.seed),
            };
            let fx = make_planted_returns(&spec)?;
            write_atomic(&a.out, fx.table.to_csv()?.as_bytes())?;
            if let Some(p) = a.planted_out {
                #[derive(Serialize)]
                struct Pair<'a> {
                    src: &'a str,
                    dst: &'a str,
                }
                let pairs: Vec<Pair> = fx.planted.iter().map(|(s, d)| Pair { src: s, dst: d }).collect();
                write_atomic(p, render_records_csv(&pairs)?.as_bytes())?;
            }
            Ok(())
        }
        Command::Distribution(a) => {
            let kind: StructureKind = a.structure.parse()?;
            let seed = file.seed(a.data.seed);
            let inst = Instance::generate(
                &structure_spec(kind, &a.data, file, seed),
                &anomaly_spec(a.mu, &a.data, file, seed),
                CovarianceMode::Direct,
            )?;
            #[derive(Serialize)]
            struct Row {
                matrix: &'static str,
                bin_lo: f64,
                bin_hi: f64,
                count: u64,
            }
            let mut rows = Vec::new();
            for (label, m) in [("covariance", inst.theta0.inverse()?), ("anomaly", inst.s0.clone())] {
                let h = entry_distribution(&m, a.bins)?;
                for k in 0..h.counts.len() {
                    rows.push(Row {
                        matrix: label,
                        bin_lo: h.edges[k],
                        bin_hi: h.edges[k + 1],
                        count: h.counts[k],
                    });
                }
            }
            write_records(&a.out, &rows)
        }
    }
}

fn graph(a: GraphArgs, file: &ConfigFile) -> Result<()> {
    let format: GraphFormat = a.format.parse()?;
    let exclude = a.exclude.map(|l| l.0).unwrap_or_default();
    let (names, s) = match (&a.s_matrix, &a.returns) {
        (Some(p), _) => {
            let f = read_matrix_csv(p)?;
            let s = SymMatrix::new(f.matrix)?;
            let names = f
                .names
                .unwrap_or_else(|| (0..s.dim()).map(|j| format!("col_{j}")).collect());
            (names, s)
        }
        (None, Some(p)) => {
            let mut table = load_returns(p)?;
            if a.exclude_mode == ExcludeMode::Resolve && !exclude.is_empty() {
                let (t, unknown) = table.without_assets(&exclude);
                warn_unknown(&unknown);
                table = t;
            }
            let m = covariance_from_returns(&table)?;
            let r = rglasso_solve(&m, &solver_config(file, &a.solver)?)?;
            (table.asset_names, r.s)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let mut g = extract_graph(&s, &names, a.threshold)?;
    if a.exclude_mode == ExcludeMode::Graph && !exclude.is_empty() {
        let (kept, unknown) = g.exclude(&exclude);
        warn_unknown(&unknown);
        g = kept;
    }
    if let Some(center) = &a.ego {
        g = g.ego(center, a.ego_radius)?;
    }
    write_atomic(&a.out, g.render(format)?.as_bytes())?;
    if let Some(p) = a.degrees_out {
        #[derive(Serialize)]
        struct Degree {
            name: String,
            degree: usize,
        }
        let rows: Vec<Degree> = g
            .ranked_by_degree()
            .into_iter()
            .map(|(name, degree)| Degree { name, degree })
            .collect();
        write_atomic(p, render_records_csv(&rows)?.as_bytes())?;
    }
    Ok(())
}

fn warn_unknown(unknown: &[String]) {
    if !unknown.is_empty() {
        eprintln!("warning: not in the data, ignored: {}", unknown.join(","));
    }
}

fn load_returns(path: &Path) -> Result<ReturnsTable> {
    let t = load_returns_csv(path, &LoadOptions::default())?;
    if t.dropped_rows > 0 {
        eprintln!("warning: dropped {} malformed rows from {}", t.dropped_rows, path.display());
    }
    Ok(t)
}

fn structure_spec(kind: StructureKind, d: &DataFlags, file: &ConfigFile, seed: u64) -> StructureSpec {
    StructureSpec {
        density: d.density.or(file.density).unwrap_or(0.05),
        ..StructureSpec::new(kind, d.p, seed)
    }
}

fn anomaly_spec(mu: f64, d: &DataFlags, file: &ConfigFile, seed: u64) -> AnomalySpec {
    AnomalySpec {
        sigma2: d.sigma2.or(file.sigma2).unwrap_or(10.0),
        ..AnomalySpec::new(mu, seed)
    }
}

fn covariance_mode(d: &DataFlags, file: &ConfigFile, seed: u64) -> Result<CovarianceMode> {
    if d.direct {
        return Ok(CovarianceMode::Direct);
    }
    let n = d.n.or(file.n).unwrap_or(100_000);
    if n == 0 {
        return Err(Error::param("n", "sample size must be positive"));
    }
    Ok(CovarianceMode::Sampled { n, seed })
}

fn write_json(path: String, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    write_atomic(path, text.as_bytes())
}
