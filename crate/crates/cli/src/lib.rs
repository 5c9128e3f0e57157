//! Command-line front end: fit tolerance regions from CSV, classify new
//! points, export depth ranks, spacings and hulls, and run the simulation
//! harness.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mvspacings::depth::DepthKind;
use mvspacings::numerics::Distribution;
use mvspacings::tolerance::ToleranceKind;

pub mod commands;
pub mod csvio;
pub mod model;

pub use commands::{minimality_gaps, simulation_report, MinimalitySummary};
pub use model::ModelFile;

const CONVENTIONS: &str = "\
Conventions:
  Depth order is by decreasing depth; equal depths are ranked by increasing
  row id (rows are numbered from 1, a header row is not counted).
  A fitted region is {x : D(x) > Z[r_n]} with a strict inequality, where
  Z[r_n] is the r_n-th largest depth of the training points. Points whose
  depth equals the threshold are outside.
  Simplicial depth counts closed simplices. Inside a fitted region (fit,
  check, hull, simulate) a simplex with a vertex equal to the query point is
  not counted, so training points and new points are judged alike.
  The spacing index of a point with depth d is 1 + #{training points with
  depth >= d}; with distinct depths the point of rank i reports spacing i+1.

Exit codes: 0 ok, 2 input or validation error, 3 infeasible or unsupported
configuration, 4 feature unavailable in this dimension.";

#[derive(Debug, Parser)]
#[command(name = "mvspacings", version, about = "Depth-based spacings and tolerance regions", after_long_help = CONVENTIONS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a tolerance region to a CSV sample and save it as a model file.
    #[command(after_long_help = CONVENTIONS)]
    Fit(FitArgs),
    /// Depth and region membership of each query point.
    #[command(after_long_help = CONVENTIONS)]
    Check(CheckArgs),
    /// Depth, rank and spacing index of every sample point.
    #[command(after_long_help = CONVENTIONS)]
    Spacings(SpacingsArgs),
    /// Counterclockwise hull vertices of a bivariate model.
    Hull(HullArgs),
    /// Monte-Carlo coverage of fitted regions.
    #[command(after_long_help = CONVENTIONS)]
    Simulate(SimulateArgs),
    /// Area gap between fitted and population regions (bivariate normal).
    Minimality(MinimalityArgs),
}

fn parse_depth(s: &str) -> Result<DepthKind, String> {
    DepthKind::from_tag(s).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<ToleranceKind, String> {
    ToleranceKind::from_tag(s).map_err(|e| e.to_string())
}

fn parse_dist(s: &str) -> Result<Distribution, String> {
    Distribution::from_tag(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Training sample, one point per row.
    pub input: PathBuf,
    /// mahalanobis, simplicial or simplicial-naive [default: simplicial when p = 2, else mahalanobis]
    #[arg(long, value_parser = parse_depth)]
    pub depth: Option<DepthKind>,
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    /// Confidence for content regions.
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// content or expectation.
    #[arg(long, value_parser = parse_kind, default_value = "content")]
    pub kind: ToleranceKind,
    /// Stored in the model metadata.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the model file.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    pub model: PathBuf,
    /// Query points, same number of columns as the training sample.
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SpacingsArgs {
    pub input: PathBuf,
    /// mahalanobis, simplicial or simplicial-naive [default: simplicial when p = 2, else mahalanobis]
    #[arg(long, value_parser = parse_depth)]
    pub depth: Option<DepthKind>,
}

#[derive(Debug, Clone, Args)]
pub struct HullArgs {
    pub model: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// normal, cauchy or exponential (bivariate).
    #[arg(long, value_parser = parse_dist, default_value = "normal")]
    pub dist: Distribution,
    #[arg(long, value_parser = parse_depth, default_value = "simplicial")]
    pub depth: DepthKind,
    /// Sample size [default: 100, or 300 with --full-scale]
    #[arg(long)]
    pub n: Option<usize>,
    /// Evaluation samples per replication [default: 20, or 100 with --full-scale]
    #[arg(long)]
    pub m: Option<usize>,
    /// Replications [default: 200, or 1000 with --full-scale]
    #[arg(long = "M")]
    pub big_m: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    #[arg(long, value_parser = parse_kind, default_value = "content")]
    pub kind: ToleranceKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use n = 300, m = 100, M = 1000 for sizes not given explicitly.
    #[arg(long)]
    pub full_scale: bool,
    /// Also write the report, with every replication's coverage, as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MinimalityArgs {
    /// Only normal is supported.
    #[arg(long, value_parser = parse_dist, default_value = "normal")]
    pub dist: Distribution,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    /// Uniform probes per replication.
    #[arg(long, default_value_t = 100_000)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Unavailable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Infeasible(_) => 3,
            Self::Unavailable(_) => 4,
        }
    }

    pub(crate) fn io(e: impl std::fmt::Display) -> Self {
        Self::Input(format!("write failed: {e}"))
    }
}

impl From<mvspacings::Error> for CliError {
    fn from(e: mvspacings::Error) -> Self {
        use mvspacings::Error as E;
        match e {
            E::Infeasible(_) | E::Unsupported(_) => Self::Infeasible(e.to_string()),
            other => Self::Input(other.to_string()),
        }
    }
}

/// Runs one command, writing results to `out` and warnings to `err`.
pub fn run<W: Write, E: Write>(cli: &Cli, out: &mut W, err: &mut E) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => commands::fit(a, out),
        Command::Check(a) => commands::check(a, out),
        Command::Spacings(a) => commands::spacings(a, out),
        Command::Hull(a) => commands::hull(a, out, err),
        Command::Simulate(a) => commands::simulate(a, out, err),
        Command::Minimality(a) => commands::minimality(a, out),
    }
}
