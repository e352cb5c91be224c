use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod manifest;

use error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "mcqr", version, about = "Bayesian multinomial-choice quantile regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic long-format datasets.
    Simulate(SimulateArgs),
    /// Run the Gibbs sampler for each quantile level.
    Fit(FitArgs),
    /// Posterior mean and SD per parameter, one column pair per quantile level.
    Summarize(SummarizeArgs),
    /// Potential scale reduction factors and trace exports.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// Drop the error term: utilities equal the linear predictor.
    #[arg(long)]
    pub noiseless: bool,
    /// Quantile level of the error term.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value = "sim")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Long-format CSV with columns obs_id, alt, choice_flag and covariates.
    #[arg(long, required_unless_present = "manifest")]
    pub data: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long, conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    /// Rerun exactly what an earlier manifest describes.
    #[arg(long, conflicts_with_all = ["data", "tau", "n_draws", "burn_in", "chains", "seed", "baseline"])]
    pub manifest: Option<PathBuf>,
    /// Comma-separated quantile levels.
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Total iterations per chain, burn-in included.
    #[arg(long)]
    pub n_draws: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Baseline alternative label; without a design section every covariate gets a shared coefficient.
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long, default_value = "fit")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Manifest file or the fit directory containing it.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Add a posterior-median column per quantile level.
    #[arg(long)]
    pub median: bool,
    /// Also write the table as CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Split each chain in half before computing R-hat.
    #[arg(long)]
    pub split: bool,
    /// Output directory; defaults to the manifest's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MCQR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("MCQR_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = init_threads().and_then(|()| match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Fit(args) => commands::fit(&args),
        Command::Summarize(args) => commands::summarize(&args),
        Command::Diagnose(args) => commands::diagnose(&args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcqr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
