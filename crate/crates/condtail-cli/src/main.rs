//! Command-line front end for the condtail estimators.
//!
//! Subcommands cover the estimation pipeline (`csf`, `quantile`,
//! `tail-index`, `extrapolate`), synthetic data (`simulate`), Monte Carlo
//! validation (`validate`), and the level-grid design table
//! (`variance-scan`). Every run resolves its full configuration — flags
//! layered over optional `key = value` config-file entries — before any
//! data is read or generated, and an invalid combination is rejected with
//! a single message listing every problem. Numeric results print with 10
//! significant digits; with `--out` the same digit strings are mirrored to
//! CSV, so re-parsing the file yields the printed values exactly.

mod resolve;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "condtail",
    version,
    about = "Extreme conditional quantiles and tail indices for heavy-tailed responses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the conditional survival probability at a response point
    Csf(CsfArgs),
    /// Estimate an extreme conditional quantile with its normalization and rate diagnostics
    Quantile(QuantileArgs),
    /// Estimate the conditional tail index with its asymptotic variance
    TailIndex(TailIndexArgs),
    /// Extrapolate an estimated quantile to a level beyond the sample range
    Extrapolate(ExtrapolateArgs),
    /// Draw a synthetic heavy-tailed dataset and write it as CSV
    Simulate(SimulateArgs),
    /// Monte Carlo validation of the estimators' limiting laws on synthetic data
    Validate(ValidateArgs),
    /// Tabulate the reciprocal-grid variance factor over grid sizes and locate its minimum
    VarianceScan(VarianceScanArgs),
}

/// Flags shared by the commands that read a dataset and evaluate at a point.
#[derive(Args, Debug)]
pub struct CommonOpts {
    /// Input dataset CSV with header y,x (scalar), y,x1,..,xp (vector), or y,t1,..,tm (curve)
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Evaluation point: one number for scalar covariates, a comma list for vector or curve covariates
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub x: Option<String>,

    /// Covariate bandwidth h > 0
    #[arg(long, value_name = "H", allow_negative_numbers = true)]
    pub h: Option<f64>,

    /// Response smoothing bandwidth lambda >= 0 (default 0, the unsmoothed step estimator)
    #[arg(long, value_name = "L", allow_negative_numbers = true)]
    pub lambda: Option<f64>,

    /// Plain `key = value` config file; `#` starts a comment; command-line flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Mirror the printed statistics to this CSV file
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Tail-functional selection shared by tail-index, extrapolate, and validate.
#[derive(Args, Debug)]
pub struct PhiOpts {
    /// Tail functional: hill | pickands | gomes-martins | segers | caeiro-gomes
    #[arg(long, value_name = "NAME")]
    pub phi: Option<String>,

    /// Power parameter for gomes-martins, segers, and caeiro-gomes
    #[arg(long, value_name = "P", allow_negative_numbers = true)]
    pub p: Option<f64>,

    /// Shift parameter for caeiro-gomes
    #[arg(long, value_name = "T", allow_negative_numbers = true)]
    pub theta: Option<f64>,

    /// Level-grid multipliers, a strictly decreasing comma list (default 1,1/2,..,1/9; 4,2,1 for pickands)
    #[arg(long, value_name = "LIST")]
    pub taus: Option<String>,
}

/// Synthetic-data generator shared by simulate and validate.
#[derive(Args, Debug)]
pub struct GeneratorOpts {
    /// Covariate law: scalar | vector | curve (default scalar)
    #[arg(long, value_name = "LAW")]
    pub law: Option<String>,

    /// Coordinate count for the vector law (default 2)
    #[arg(long, value_name = "P")]
    pub dim: Option<usize>,

    /// Grid length for the curve law (default 16)
    #[arg(long, value_name = "M")]
    pub grid_len: Option<usize>,

    /// Sample size per dataset
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,

    /// Response family: pareto | burr (default pareto)
    #[arg(long, value_name = "FAMILY")]
    pub family: Option<String>,

    /// Tail index of the response family
    #[arg(long, value_name = "G", allow_negative_numbers = true)]
    pub gamma: Option<f64>,

    /// Second-order exponent rho < 0 (burr family only)
    #[arg(long, value_name = "R", allow_negative_numbers = true)]
    pub rho: Option<f64>,

    /// Generator seed (default 0)
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct CsfArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Response point the survival probability is evaluated at
    #[arg(long, value_name = "Y", allow_negative_numbers = true)]
    pub y: Option<f64>,
}

#[derive(Args, Debug)]
pub struct QuantileArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Tail level in (0, 1)
    #[arg(long, value_name = "A", allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TailIndexArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Anchor tail level in (0, 1)
    #[arg(long, value_name = "A", allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    #[command(flatten)]
    pub phi: PhiOpts,
}

#[derive(Args, Debug)]
pub struct ExtrapolateArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Anchor tail level in (0, 1); the within-sample estimate is taken here
    #[arg(long, value_name = "A", allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Target tail level in (0, alpha]
    #[arg(long, value_name = "B", allow_negative_numbers = true)]
    pub beta: Option<f64>,

    #[command(flatten)]
    pub phi: PhiOpts,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub generator: GeneratorOpts,

    /// Plain `key = value` config file; `#` starts a comment; command-line flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Destination CSV for the generated dataset
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub generator: GeneratorOpts,

    /// Evaluation point; its shape must match the covariate law
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub x: Option<String>,

    /// Covariate bandwidth h > 0
    #[arg(long, value_name = "H", allow_negative_numbers = true)]
    pub h: Option<f64>,

    /// Response smoothing bandwidth lambda >= 0 (default 0)
    #[arg(long, value_name = "L", allow_negative_numbers = true)]
    pub lambda: Option<f64>,

    /// Anchor tail level in (0, 1)
    #[arg(long, value_name = "A", allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    #[command(flatten)]
    pub phi: PhiOpts,

    /// Number of Monte Carlo replicates (at least 2)
    #[arg(long, value_name = "R")]
    pub replicates: Option<usize>,

    /// Survival-probe anchor point y >= 1; adds the survival block to the report
    #[arg(long, value_name = "Y", allow_negative_numbers = true)]
    pub probe_y: Option<f64>,

    /// Survival-probe multipliers, a strictly increasing comma list starting at 1
    #[arg(long, value_name = "LIST")]
    pub probe_multipliers: Option<String>,

    /// Plain `key = value` config file; `#` starts a comment; command-line flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Mirror the report CSV to this file
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VarianceScanArgs {
    /// Tail index the variance is evaluated at (default 1)
    #[arg(long, value_name = "G", allow_negative_numbers = true)]
    pub gamma: Option<f64>,

    /// Largest grid size J to scan (default 15)
    #[arg(long, value_name = "J")]
    pub jmax: Option<usize>,

    /// Plain `key = value` config file; `#` starts a comment; command-line flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Mirror the scan table to this CSV file
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(message) = resolve::resolve(cli).and_then(run::run) {
        eprintln!("error: {message}");
        std::process::exit(1);
    }
}
