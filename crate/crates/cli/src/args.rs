use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hellcor",
    version,
    about = "Hellinger correlation: estimates, significance tests and bootstrap intervals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the Hellinger correlation of a two-column sample.
    Estimate(EstimateArgs),
    /// Estimate and test against a Monte-Carlo null table.
    Pvalue(PvalueArgs),
    /// Estimate with a double-bootstrap confidence interval.
    Ci(CiArgs),
    /// Run a simulation study and compare with reference values.
    Reproduce(ReproduceArgs),
}

/// Where the sample comes from.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Two-column numeric file (comma or whitespace delimited, optional header).
    #[arg(long, value_name = "PATH", conflicts_with = "generator", required_unless_present = "generator")]
    pub input: Option<PathBuf>,
    /// Simulated sample, e.g. `kind=gaussian,rho=0.4` or `kind=peano,d=3`.
    #[arg(long, value_name = "SPEC")]
    pub generator: Option<String>,
    /// Sample size for --generator.
    #[arg(long, default_value_t = 500, requires = "generator")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    None,
    Beta66,
}

/// Estimator settings. Fixed cutoffs take precedence over the search bounds.
#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Fixed first-coordinate cutoff (disables cross-validation).
    #[arg(long, requires = "l")]
    pub k: Option<usize>,
    /// Fixed second-coordinate cutoff.
    #[arg(long, requires = "k")]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 5, conflicts_with = "k")]
    pub kmax: usize,
    #[arg(long, default_value_t = 5, conflicts_with = "l")]
    pub lmax: usize,
    #[arg(long, value_enum, default_value = "beta66")]
    pub transform: TransformArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker thread cap; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PvalueArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Null-table size.
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    /// The critical value is reported at this level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Null table to reuse, or to create when the file is absent.
    #[arg(long, value_name = "PATH")]
    pub null_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Outer bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    pub b1: usize,
    /// Inner bootstrap replicates.
    #[arg(long, default_value_t = 100)]
    pub b2: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Table1,
    Table2,
    Figure2,
    Figure3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Desk,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, value_enum, default_value = "desk")]
    pub scale: Scale,
    #[command(flatten)]
    pub run: RunArgs,
}
