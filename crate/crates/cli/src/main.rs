use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{parse_list, ConfigFile};

#[derive(Debug, Parser)]
#[command(name = "rglasso", version, about = "Robust graphical lasso: split a covariance into a sparse-inverse part and sparse anomalies")]
struct Cli {
    /// JSON config file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose a covariance matrix (or the covariance of a returns table).
    Solve(SolveArgs),
    /// Solve a lambda x rho grid on a synthetic benchmark instance.
    Bench(BenchArgs),
    /// Vary the anomaly magnitude with penalties fixed per structure.
    SweepMu(SweepMuArgs),
    /// Robust PCA baseline decomposition.
    Rpca(RpcaArgs),
    /// Robust graphical lasso against robust PCA over a range of dimensions.
    Compare(CompareArgs),
    /// Extract an anomaly graph from S or from a returns table.
    Graph(GraphArgs),
    /// Write the synthetic planted-correlation returns fixture.
    Fixture(FixtureArgs),
    /// Histograms of the entries of a benchmark covariance and its anomalies.
    Distribution(DistributionArgs),
}

#[derive(Debug, Clone, Args, Default)]
struct SolverFlags {
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    /// Cap on the penalty parameters (unbounded by default).
    #[arg(long)]
    mu_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct GridFlags {
    #[arg(long)]
    threads: Option<usize>,
    /// Run cells one after another.
    #[arg(long, conflicts_with = "threads")]
    sequential: bool,
    /// Fill the wall_time column.
    #[arg(long)]
    timing: bool,
    /// Support tolerance relative to max(1, max|S|).
    #[arg(long)]
    support_tol_rel: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["input", "returns"])))]
struct SolveArgs {
    /// Covariance matrix CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Returns CSV (rows are time steps, columns are assets).
    #[arg(long)]
    returns: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Output files are <prefix>F.csv, <prefix>S.csv, <prefix>theta.csv and <prefix>summary.json.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Debug, Args)]
struct DataFlags {
    #[arg(long, default_value_t = 200)]
    p: usize,
    /// Sample size for the empirical covariance.
    #[arg(long, conflicts_with = "direct")]
    n: Option<usize>,
    /// Use the exact contaminated covariance instead of a sampled one.
    #[arg(long)]
    direct: bool,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    structure: String,
    #[command(flatten)]
    data: DataFlags,
    #[arg(long, default_value_t = 1000.0)]
    mu: f64,
    #[arg(long, value_parser = parse_list::<f64>)]
    lambda_grid: ListArg<f64>,
    #[arg(long, value_parser = parse_list::<f64>)]
    rho_grid: ListArg<f64>,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    grid: GridFlags,
    /// Record file; `.jsonl` writes JSON lines, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepMuArgs {
    #[arg(long, value_parser = parse_list::<String>, default_value = "1,2,3")]
    structures: ListArg<String>,
    /// One lambda per structure.
    #[arg(long, value_parser = parse_list::<f64>)]
    lambdas: ListArg<f64>,
    /// One rho per structure, or a single value for all.
    #[arg(long, value_parser = parse_list::<f64>, default_value = "0.05")]
    rhos: ListArg<f64>,
    #[arg(long, value_parser = parse_list::<f64>, default_value = "10,30,50,200,1000")]
    mu_grid: ListArg<f64>,
    #[command(flatten)]
    data: DataFlags,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    grid: GridFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RpcaArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to 1/sqrt(max(rows, cols)).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Output files are <prefix>L.csv, <prefix>S.csv and <prefix>summary.json.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, value_parser = parse_list::<usize>, default_value = "50,100,200")]
    p_grid: ListArg<usize>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1000.0)]
    mu: f64,
    #[arg(long)]
    rpca_lambda: Option<f64>,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    grid: GridFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ExcludeMode {
    /// Remove the nodes and their edges from the extracted graph.
    Graph,
    /// Drop the assets from the returns table and solve again.
    Resolve,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["s_matrix", "returns"])))]
struct GraphArgs {
    /// Anomaly matrix CSV; a header row supplies node names.
    #[arg(long)]
    s_matrix: Option<PathBuf>,
    /// Returns CSV to run the full pipeline on (requires --rho and --lambda).
    #[arg(long, requires_all = ["rho", "lambda"])]
    returns: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Edge threshold on |S_ij|; defaults to 1e-6 * max(1, max|S|).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Node names to remove.
    #[arg(long, value_parser = parse_list::<String>)]
    exclude: Option<ListArg<String>>,
    #[arg(long, value_enum, default_value_t = ExcludeMode::Graph)]
    exclude_mode: ExcludeMode,
    /// Keep only this node and its neighbourhood.
    #[arg(long)]
    ego: Option<String>,
    #[arg(long, default_value_t = 1)]
    ego_radius: usize,
    /// Also write node degrees (name,degree) here, highest first.
    #[arg(long)]
    degrees_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    #[arg(long)]
    assets: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    hidden_pairs: Option<usize>,
    #[arg(long)]
    shock_variance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Returns CSV.
    #[arg(long)]
    out: PathBuf,
    /// Planted pairs as an edge list (src,dst).
    #[arg(long)]
    planted_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DistributionArgs {
    #[arg(long)]
    structure: String,
    #[command(flatten)]
    data: DataFlags,
    #[arg(long, default_value_t = 1000.0)]
    mu: f64,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
}

/// A comma-separated list flag.
#[derive(Debug, Clone)]
struct ListArg<T>(Vec<T>);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report("usage", &e.render().to_string(), 2);
        }
    };
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => return fail(e),
    };
    match commands::run(cli.command, &file) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: rglasso::Error) -> ExitCode {
    let category = e.category();
    report(category.as_str(), &e.to_string(), exit_code(category))
}

fn exit_code(category: rglasso::ErrorCategory) -> u8 {
    match category {
        rglasso::ErrorCategory::Usage => 2,
        rglasso::ErrorCategory::Ingestion => 3,
        rglasso::ErrorCategory::Solver => 4,
    }
}

fn report(category: &str, message: &str, code: u8) -> ExitCode {
    let doc = serde_json::json!({ "error": category, "message": message.trim_end() });
    eprintln!("{doc}");
    ExitCode::from(code)
}
