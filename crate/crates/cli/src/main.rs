//! Command-line front end: evaluate persistence curves, estimate from data,
//! run the two-sample test and its sensitivity scan, and run the Monte
//! Carlo studies.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
//! The test command exits 0 whatever the statistical decision is; the
//! decision is data, not a failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qepf::eqtest::DEFAULT_SEED;

mod commands;
mod io;

#[derive(Parser)]
#[command(
    name = "qepf",
    version,
    about = "Quantile-based effectiveness persistence: curves, estimation, tail tests, simulations",
    after_help = "Runs are reproducible by default: every command uses the fixed default seed \
                  unless --seed overrides it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for all randomized steps (fixed default keeps runs reproducible).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; stdout when omitted. Files are written atomically.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate P(u) (and companion functionals) for a model over a u-grid.
    Curve(CurveArgs),
    /// Estimate P(u) from sample data with bootstrap intervals.
    Estimate(EstimateArgs),
    /// Two-sample test of equal persistence curves on a trimmed interval.
    Test(TestArgs),
    /// Monte Carlo studies: estimator bias/MSE or test power/size.
    Simulate(SimulateArgs),
}

#[derive(Args)]
pub struct CurveArgs {
    /// Model specification, e.g. "weibull k=2 lambda=1 shift=0.5".
    #[arg(long)]
    pub model: String,

    #[arg(long, default_value_t = 0.05)]
    pub u_min: f64,

    #[arg(long, default_value_t = 0.95)]
    pub u_max: f64,

    #[arg(long, default_value_t = 0.01)]
    pub step: f64,

    /// Also emit the mean residual quantile M(u).
    #[arg(long)]
    pub with_mrq: bool,

    /// Also emit the hazard-quantile H(u).
    #[arg(long)]
    pub with_hazard: bool,

    /// Also emit the Lorenz curve L(u).
    #[arg(long)]
    pub with_lorenz: bool,

    /// Also emit the TTT transform T(u).
    #[arg(long)]
    pub with_ttt: bool,

    /// Quadrature rule for models without a closed form.
    #[arg(long, value_enum, default_value_t = Rule::Adaptive)]
    pub rule: Rule,

    /// Node count for the fixed Gauss-Legendre rule.
    #[arg(long, default_value_t = 64)]
    pub points: usize,

    /// Relative tolerance for the adaptive rule.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Adaptive,
    Gauss,
}

#[derive(Args)]
pub struct EstimateArgs {
    /// Input CSV: one value per line, or `group,value` with a header.
    #[arg(long)]
    pub input: PathBuf,

    /// Explicit comma-separated u values (overrides the range flags).
    #[arg(long)]
    pub u: Option<String>,

    #[arg(long, default_value_t = 0.60)]
    pub u_min: f64,

    #[arg(long, default_value_t = 0.90)]
    pub u_max: f64,

    #[arg(long, default_value_t = 0.05)]
    pub step: f64,

    /// Bootstrap replicates for the confidence interval.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,

    /// Confidence level of the bootstrap interval.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Args)]
pub struct TestArgs {
    /// Input CSV with a `group,value` header and exactly two groups; the
    /// first-appearing group is the reference arm.
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, default_value_t = 0.60)]
    pub u_lower: f64,

    #[arg(long, default_value_t = 0.90)]
    pub u_upper: f64,

    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,

    /// Bootstrap replicates for calibration.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Run the sensitivity scan over the standard sixteen intervals
    /// instead of a single test.
    #[arg(long)]
    pub scan: bool,

    /// Custom scan intervals as `lo:hi` pairs, e.g. "0.2:0.8,0.3:0.9".
    #[arg(long, requires = "scan")]
    pub intervals: Option<String>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Which study to run.
    #[arg(long, value_enum)]
    pub study: Study,

    /// Monte Carlo replications per cell (bias/MSE study).
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,

    /// Monte Carlo trials per design point (power/size study).
    #[arg(long, default_value_t = 500)]
    pub trials: usize,

    /// Bootstrap replicates inside each trial (power/size study).
    #[arg(long, default_value_t = 500)]
    pub bootstrap: usize,

    /// Use the full-scale trial count (2000) for the power/size study.
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Study {
    BiasMse,
    PowerSize,
}

/// An error carrying its process exit code.
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<qepf::Error> for CliError {
    fn from(e: qepf::Error) -> Self {
        use qepf::Error::*;
        let code = match e {
            Parse(_) | Config(_) | Domain(_) => 1,
            Ingest { .. } | TailEmpty { .. } | ZeroThreshold => 2,
            InfiniteMean(_) | NonMonotone(_) | Convergence(_) | Quadrature(_) | Infeasible(_) => 3,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            // Help and version output.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let seed = cli.seed;
    let format = cli.format;
    let output = cli.output.clone();
    let result = match &cli.command {
        Command::Curve(args) => commands::curve(args, seed, format),
        Command::Estimate(args) => commands::estimate(args, seed, format),
        Command::Test(args) => commands::test(args, seed, format),
        Command::Simulate(args) => commands::simulate(args, seed, format),
    };

    match result {
        Ok(content) => match io::write_output(output.as_deref(), &content) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write output: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
