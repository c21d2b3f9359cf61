use std::path::PathBuf;

use bmax_core::{Entropy, ExactMethod};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "bmax",
    version,
    about = "Bayesian model averaging with greedy and exact solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fit one estimator to a data set and write its estimate and trace.
    Solve(SolveArgs),
    /// Solve the primal problem and certify the primal-dual saddle point.
    DualityCheck(DualityArgs),
    /// Run a Monte-Carlo comparison of estimators over many replicates.
    Experiment(ExperimentArgs),
    /// Check the deviation oracle inequality of the exact estimator by simulation.
    OracleCheck(OracleArgs),
}

/// Where the data comes from: a CSV file or one draw of a scenario.
#[derive(Args, Clone, Debug)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// CSV with header `y[,truth],f1,...,fM`, one row per design point.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Draw the data from a built-in scenario (exp1 or exp2).
    #[arg(long)]
    pub preset: Option<String>,
    /// Draw the data from the scenario described in a JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct Draw {
    /// Seed of a generated scenario (overrides the seed in --scenario).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replicate index of a generated scenario.
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
}

#[derive(Args, Clone, Debug)]
pub struct Model {
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    /// Temperature ω².
    #[arg(long, default_value_t = 1.0)]
    pub omega_sq: f64,
    /// Entropy; defaults to linear for gma-0 and kl otherwise.
    #[arg(long, value_enum)]
    pub entropy: Option<EntropyArg>,
    /// Comma-separated prior weights, one per candidate (flat when absent).
    #[arg(long, value_delimiter = ',')]
    pub prior: Option<Vec<f64>>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyArg {
    Kl,
    Linear,
}

impl From<EntropyArg> for Entropy {
    fn from(e: EntropyArg) -> Self {
        match e {
            EntropyArg::Kl => Entropy::Kl,
            EntropyArg::Linear => Entropy::Linear,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BmaxExact,
    GmaBmax,
    #[value(name = "gma-0")]
    #[serde(rename = "gma-0")]
    Gma0,
    Ewma,
    Star,
    Proj,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactMethodArg {
    Newton,
    FixedPoint,
    GradientDescent,
}

impl From<ExactMethodArg> for ExactMethod {
    fn from(m: ExactMethodArg) -> Self {
        match m {
            ExactMethodArg::Newton => ExactMethod::Newton,
            ExactMethodArg::FixedPoint => ExactMethod::FixedPoint,
            ExactMethodArg::GradientDescent => ExactMethod::GradientDescent,
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct ExactArgs {
    /// Gradient-norm tolerance of the exact solver.
    #[arg(long, default_value_t = 1e-10)]
    pub grad_tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: usize,
    #[arg(long, value_enum, default_value = "newton")]
    pub exact_method: ExactMethodArg,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub draw: Draw,
    #[arg(long, value_enum)]
    pub method: Method,
    #[command(flatten)]
    pub model: Model,
    /// Greedy iterations (default 150; 200 for proj).
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub exact: ExactArgs,
    /// Output directory for summary.json and trace.csv.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct DualityArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub draw: Draw,
    #[command(flatten)]
    pub model: Model,
    /// Bound on the residuals and on the relative duality gap.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[command(flatten)]
    pub exact: ExactArgs,
    /// Also write the report to `<out>/summary.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
#[group(required = true, multiple = false)]
pub struct ExperimentSource {
    /// Built-in experiment (exp1 or exp2).
    #[arg(long)]
    pub preset: Option<String>,
    /// Experiment configuration JSON, or a summary.json from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub source: ExperimentSource,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "BMAX_WORKERS")]
    pub workers: Option<usize>,
    /// Output directory for summary.json and replicates.csv.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug)]
#[group(required = true, multiple = false)]
pub struct OracleSource {
    /// Built-in scenario (exp1 or exp2).
    #[arg(long)]
    pub preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: OracleSource,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    /// Temperature ω²; defaults to the smallest admissible value σ²/min(ν, 1-ν).
    #[arg(long)]
    pub omega_sq: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, env = "BMAX_WORKERS")]
    pub workers: Option<usize>,
    /// Also write the report to `<out>/summary.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
