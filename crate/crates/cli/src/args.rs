use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "duem",
    version,
    about = "Noisy average consensus: simulation, MSE analysis and Laplacian optimization"
)]
pub struct Cli {
    /// Seed for every random draw of the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Primary output file. Without it CSV goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON recipe (or a previous run manifest) for `optimize`.
    #[arg(long, global = true)]
    pub recipe: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a benchmark graph as an edge list plus its Laplacian CSV.
    Graph(GraphCmd),
    /// Eigenvalues, algebraic connectivity and inverse eigenvalue sum.
    Spectrum(SourceOnly),
    /// One Euler-Maruyama trajectory.
    Simulate(SimulateCmd),
    /// Closed-form MSE and AMSE curves, optionally with a Monte Carlo column.
    Mse(MseCmd),
    /// Deep-unfolded optimization of the edge weights.
    Optimize(OptimizeCmd),
    /// MSE curves of a baseline and an optimized Laplacian.
    Compare(CompareCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphName {
    Cycle,
    Complete,
    Petersen,
    House,
    Karate,
    Ba,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Source {
    /// Named graph.
    #[arg(long = "graph", visible_alias = "name", value_enum)]
    pub graph: Option<GraphName>,
    /// Node count for cycle, complete and ba.
    #[arg(long)]
    pub n: Option<usize>,
    /// Edges per new node for ba.
    #[arg(long)]
    pub m: Option<usize>,
    /// Weighted Laplacian CSV; the topology is read from its nonzeros.
    #[arg(long, conflicts_with = "graph")]
    pub laplacian: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphCmd {
    #[command(flatten)]
    pub source: Source,
    /// Laplacian CSV path; defaults to `<out stem>_laplacian.csv`.
    #[arg(long)]
    pub laplacian_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SourceOnly {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub source: Source,
    #[arg(long = "T", default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long = "N", default_value_t = 250)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Initial state CSV (one row); drawn from N(0, I) when absent.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MseCmd {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Add a Monte Carlo column.
    #[arg(long)]
    pub mc: bool,
    /// EM steps over `[0, tmax]` for the Monte Carlo column.
    #[arg(long = "N", default_value_t = 250)]
    pub bins: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Problem {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Args)]
pub struct OptimizeCmd {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    /// Degree target CSV, or `from-graph` for the diagonal of the base Laplacian.
    #[arg(long)]
    pub degree_target: Option<String>,
    #[arg(long)]
    pub degree_sum: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub tstar: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "unfold-N")]
    pub unfold_n: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long)]
    pub rho3: Option<f64>,
    #[arg(long)]
    pub rho4: Option<f64>,
    /// Loss log CSV.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    /// Baseline topology; its unweighted Laplacian is the reference.
    #[command(flatten)]
    pub source: Source,
    /// Baseline Laplacian CSV, overriding the unweighted one.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[arg(long)]
    pub optimized: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}
