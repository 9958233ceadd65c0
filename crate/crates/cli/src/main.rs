mod commands;
mod config;
mod manifest;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ABORT: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "pslab",
    version,
    about = "Random geometric filtrations, persistent Betti numbers and stabilization experiments",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the `seed` field of the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: `$PSLAB_OUT/<command>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Never changes output bytes.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Result directory to plot (default: `--out`, then `$PSLAB_OUT`).
    pub dir: Option<PathBuf>,
    /// Optional JSON with a `query` override for the diagram plot.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a Poisson, binomial or homogeneous point cloud.
    Sample(RunArgs),
    /// Build a filtered Čech or Vietoris-Rips complex.
    Complex(RunArgs),
    /// Compute a persistence diagram and persistent Betti numbers.
    Persist(RunArgs),
    /// Weak stabilization radii and strong-radius surrogates for a job list.
    Radius(RunArgs),
    /// Estimate α(r, s), optionally with the de-Poissonization check.
    Alpha(RunArgs),
    /// CLT replicate study, optionally with the binomial/Poisson variance relation.
    Clt(RunArgs),
    /// Radius tail (tightness) experiment.
    Tails(RunArgs),
    /// Emit SVG plots for an existing result directory.
    Report(ReportArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidValue | ErrorKind::ValueValidation => EXIT_CONFIG,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sample(a) => commands::sample(&a),
        Command::Complex(a) => commands::complex(&a),
        Command::Persist(a) => commands::persist(&a),
        Command::Radius(a) => commands::radius(&a),
        Command::Alpha(a) => commands::alpha(&a),
        Command::Clt(a) => commands::clt(&a),
        Command::Tails(a) => commands::tails(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pslab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
