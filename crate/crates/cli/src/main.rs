//! `beamalign`: channel generation, multi-start runs, SNR sweeps, the
//! zero-forcing gap study and report rendering.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use beamalign::solution::Algorithm;

#[derive(Parser, Debug)]
#[command(name = "beamalign", version, about = "Interference alignment and max-SINR experiments on MIMO interference channels")]
struct Cli {
    /// TOML file with defaults for any flag (flags win).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 1 runs everything serially.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log more to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Dims {
    /// Number of users.
    #[arg(long = "K")]
    pub users: Option<usize>,
    /// Antennas per node.
    #[arg(long = "M")]
    pub antennas: Option<usize>,
    /// Streams per user.
    #[arg(long = "d")]
    pub streams: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a channel realization and write it as JSON.
    GenChannels {
        #[command(flatten)]
        dims: Dims,
        /// Channel seed (BEAMALIGN_SEED overrides).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multi-start runs of one algorithm on one channel, clustered into modes.
    Run(RunArgs),
    /// The same init set at every SNR of a range, written as CSV.
    Sweep(SweepArgs),
    /// Mean rate loss of zero-forcing outer receivers over random channels.
    ZfGap {
        #[command(flatten)]
        dims: Dims,
        /// Number of channel realizations.
        #[arg(long)]
        channels: Option<usize>,
        #[arg(long = "snr-db")]
        snr_db: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional JSON dump of the per-channel gaps.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Markdown tables or plot CSV from stored sweep and run results.
    Report {
        /// Directory holding sweep CSV files and run JSON documents.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Md)]
        format: ReportFormat,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub algo: Option<Algorithm>,
    /// Channel JSON written by gen-channels.
    #[arg(long)]
    pub channels: Option<PathBuf>,
    #[command(flatten)]
    pub dims: Dims,
    #[arg(long = "snr-db")]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub inits: Option<usize>,
    /// Master seed of the init sequence (BEAMALIGN_SEED overrides).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub algo: Option<Algorithm>,
    #[arg(long)]
    pub channels: Option<PathBuf>,
    #[command(flatten)]
    pub dims: Dims,
    /// `start:step:stop`, inclusive, or a single value.
    #[arg(long = "snr-db")]
    pub snr_db: String,
    #[arg(long)]
    pub inits: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sweep CSV; existing complete SNR points are kept and skipped.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Md,
    Csv,
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_CONVERGENCE: u8 = 4;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl From<beamalign::Error> for CliError {
    fn from(e: beamalign::Error) -> Self {
        use beamalign::Error as E;
        let code = match e {
            E::InvalidConfig(_) | E::InfeasibleConfig { .. } | E::Shape(_) | E::NotOrthonormal { .. } => EXIT_CONFIG,
            E::Io { .. } | E::Format { .. } | E::SchemaVersion { .. } => EXIT_IO,
            E::NonConvergence { .. } => EXIT_CONVERGENCE,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => config::CliConfig::load(path)?,
        None => config::CliConfig::default(),
    };
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::GenChannels { dims, seed, out: path } => commands::gen_channels(&file, &dims, seed, &path, &mut out),
        Command::Run(args) => commands::run(&file, cli.workers, &args, &mut out),
        Command::Sweep(args) => commands::sweep(&file, cli.workers, &args, &mut out),
        Command::ZfGap { dims, channels, snr_db, seed, out: path } => {
            commands::zf_gap(&file, cli.workers, &dims, channels, snr_db, seed, path.as_deref(), &mut out)
        }
        Command::Report { input, format, out: path } => commands::report(&input, format, path.as_deref(), &mut out),
    }
}
