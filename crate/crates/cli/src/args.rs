use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "roymax",
    version,
    about = "Largest-eigenvalue distribution of singular beta F-matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate Pr(q1 < x).
    Cdf(CdfArgs),
    /// Solve Pr(q1 < x) = alpha for x.
    Quantile(QuantileArgs),
    /// Print the exact rational CDF polynomial (beta = 1, identity scale).
    Poly(PolyArgs),
    /// Write the CDF on a grid as `x,cdf` CSV.
    PlotData(PlotArgs),
    /// Compare the analytic CDF against simulated largest eigenvalues.
    McVerify(McArgs),
    /// Roy's largest-root test for a balanced one-way MANOVA.
    RoyTest(RoyArgs),
    /// Reproduce the percentile table for p = 20, n = 4, m in {5, 15}.
    Table1(Table1Args),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    #[default]
    Auto,
    Theorem,
    Positive,
    Finite,
    Euler,
    Identity,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum McMode {
    #[default]
    FMatrix,
    MoorePenrose,
}

#[derive(Clone, Debug, Args)]
pub struct DimsArgs {
    /// Matrix order.
    #[arg(long)]
    pub m: usize,
    /// Rank of the numerator Wishart matrix.
    #[arg(long)]
    pub n: usize,
    /// Degrees of freedom of the denominator Wishart matrix.
    #[arg(long)]
    pub p: usize,
    /// 1 (real), 2 (complex) or 4 (quaternion).
    #[arg(long, default_value_t = 1)]
    pub beta: u32,
}

#[derive(Clone, Debug, Args)]
pub struct SeriesArgs {
    /// Eigenvalues of the scale matrix, comma separated, or `identity`.
    #[arg(long, default_value = "identity")]
    pub sigma: String,
    /// Largest series degree K.
    #[arg(long, default_value_t = 30)]
    pub truncation: u32,
    /// Stop early once two consecutive degrees add less than this.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub dims: DimsArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long)]
    pub x: f64,
    #[arg(long, value_enum, default_value_t)]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct QuantileArgs {
    #[command(flatten)]
    pub dims: DimsArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct PolyArgs {
    #[command(flatten)]
    pub dims: DimsArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub dims: DimsArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Explicit grid, comma separated and strictly increasing.
    #[arg(long, conflicts_with_all = ["from", "to", "points"])]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub from: f64,
    #[arg(long, default_value_t = 20.0)]
    pub to: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Output file; defaults to a name derived from the dimensions inside
    /// `$ROYMAX_OUT_DIR` (or the working directory).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub dims: DimsArgs,
    /// Scale of the numerator covariance (the denominator has identity scale).
    #[arg(long, default_value = "identity")]
    pub sigma: String,
    #[arg(long, value_enum, default_value_t)]
    pub mode: McMode,
    #[arg(long = "samples", short = 'N', default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Significance level of the KS test.
    #[arg(long, default_value_t = 0.01)]
    pub level: f64,
    #[arg(long, default_value_t = 30)]
    pub truncation: u32,
    /// Also write the simulated values to this CSV file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct RoyArgs {
    #[arg(long)]
    pub groups: usize,
    #[arg(long)]
    pub variables: usize,
    /// Observations per group.
    #[arg(long)]
    pub per_group: usize,
    /// Confidence level of the critical value.
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    /// Nonzero eigenvalues of the sample F-matrix, comma separated.
    #[arg(long, required_unless_present = "observed")]
    pub roots: Option<String>,
    /// Largest root alone, when the others are not available.
    #[arg(long)]
    pub observed: Option<f64>,
    #[arg(long, default_value_t = 30)]
    pub truncation: u32,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct Table1Args {
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}
