use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Conditional independence tests and dependency graphs via projected
/// distance covariance.
#[derive(Debug, Parser)]
#[command(name = "pdcov", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether two column blocks are independent given factor columns.
    Test(TestArgs),
    /// Build a conditional-dependency graph over node columns.
    Graph(GraphArgs),
    /// Run one of the five built-in Monte Carlo designs.
    Simulate(SimulateArgs),
    /// ROC/AUC from a p-value matrix and a truth adjacency matrix.
    Roc(RocArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProjectionArg {
    Ols,
    Lasso,
    Additive,
}

impl ProjectionArg {
    pub fn to_method(self) -> pdcov::Method {
        match self {
            ProjectionArg::Ols => pdcov::Method::Ols,
            ProjectionArg::Lasso => pdcov::Method::LassoCvRefit,
            ProjectionArg::Additive => pdcov::Method::AdditiveSpline,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SelectionArg {
    Alpha,
    Bh,
}

impl SelectionArg {
    pub fn to_selection(self) -> pdcov::Selection {
        match self {
            SelectionArg::Alpha => pdcov::Selection::PerTestAlpha,
            SelectionArg::Bh => pdcov::Selection::BhFdr,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Internal,
    External,
    TwoStep,
}

impl ModeArg {
    pub fn to_mode(self) -> pdcov::FactorMode {
        match self {
            ModeArg::Internal => pdcov::FactorMode::Internal,
            ModeArg::External => pdcov::FactorMode::External,
            ModeArg::TwoStep => pdcov::FactorMode::TwoStep,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeasureArg {
    Dcov,
    Pearson,
}

impl MeasureArg {
    pub fn to_measure(self) -> pdcov::Measure {
        match self {
            MeasureArg::Dcov => pdcov::Measure::DCov,
            MeasureArg::Pearson => pdcov::Measure::Pearson,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GArg {
    Linear,
    Square,
}

impl GArg {
    pub fn to_g_mode(self) -> pdcov::sim::GMode {
        match self {
            GArg::Linear => pdcov::sim::GMode::Linear,
            GArg::Square => pdcov::sim::GMode::Square,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TScalingArg {
    Paper,
    Standard,
}

impl TScalingArg {
    pub fn to_scaling(self) -> pdcov::sim::TScaling {
        match self {
            TScalingArg::Paper => pdcov::sim::TScaling::Paper,
            TScalingArg::Standard => pdcov::sim::TScaling::Standard,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Input CSV with observations in rows.
    #[arg(long)]
    pub input: PathBuf,
    /// Treat the first CSV line as column names.
    #[arg(long)]
    pub header: bool,
    /// Columns of the first block: names or zero-based indices/ranges,
    /// e.g. "0-4" or "open,close".
    #[arg(long = "x-cols")]
    pub x_cols: String,
    /// Columns of the second block.
    #[arg(long = "y-cols")]
    pub y_cols: String,
    /// Factor columns to project on (may be omitted for a plain
    /// independence test on centered blocks).
    #[arg(long = "factor-cols")]
    pub factor_cols: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Lasso)]
    pub projection: ProjectionArg,
    /// Permutation count R; omit for R(n) = floor(200 + 5000/n), 0 for the
    /// asymptotic decision only.
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Node columns (default: every column not used as a factor).
    #[arg(long = "x-cols")]
    pub x_cols: Option<String>,
    /// Factor columns; required for external and two-step modes.
    #[arg(long = "factor-cols")]
    pub factor_cols: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Internal)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SelectionArg::Alpha)]
    pub selection: SelectionArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Lasso)]
    pub projection: ProjectionArg,
    #[arg(long, value_enum, default_value_t = MeasureArg::Dcov)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Use only testable pairs in the BH denominator instead of d(d-1)/2.
    #[arg(long = "bh-testable-denominator")]
    pub bh_testable_denominator: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// JSON output path; an edge-list CSV is written next to it with the
    /// extension replaced by .csv. Without --out the JSON goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design id: 1 factor-model test, 2 Gaussian graph, 3 mixed t/Gaussian
    /// graph, 4 factor graph, 5 mixed graph with external factors.
    #[arg(long)]
    pub example: u8,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Node count for designs 2 and 4 (desk-scale default).
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Factor count for design 4.
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    /// Equal-correlation parameter of design 1.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long = "g", value_enum, default_value_t = GArg::Linear)]
    pub g_mode: GArg,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Comma-separated alpha levels for the design-1 rate table.
    #[arg(long, default_value = "0.1")]
    pub alphas: String,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Lasso)]
    pub projection: ProjectionArg,
    #[arg(long, value_enum, default_value_t = MeasureArg::Dcov)]
    pub measure: MeasureArg,
    /// Conditioning mode override for designs 4 and 5.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Use the true errors instead of projecting (design 1).
    #[arg(long)]
    pub oracle: bool,
    /// Paper-scale run: d = 30 and 1000 repetitions.
    #[arg(long = "paper-scale")]
    pub paper_scale: bool,
    #[arg(long = "t-scaling", value_enum, default_value_t = TScalingArg::Paper)]
    pub t_scaling: TScalingArg,
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    /// Symmetric p-value matrix CSV (d x d, diagonal ignored).
    #[arg(long)]
    pub input: PathBuf,
    /// Truth adjacency CSV (d x d of 0/1, diagonal ignored).
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
