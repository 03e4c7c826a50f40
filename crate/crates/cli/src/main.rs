mod commands;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use settings::Settings;

/// Cabin layouts, synthetic fare markets and PDS-LASSO fare regressions.
#[derive(Debug, Parser)]
#[command(name = "cabinfare", version)]
struct Cli {
    /// `key = value` settings file; flags override it, CABINFARE_* variables fill gaps.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads for estimation and generation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Seat-map utilities.
    #[command(subcommand)]
    Cabin(CabinCommand),
    /// Synthetic market generation.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Run the specification ladder on a study dataset.
    Estimate(EstimateArgs),
}

#[derive(Debug, Subcommand)]
enum CabinCommand {
    /// Parse and validate a .smap file and summarise it.
    Parse {
        file: PathBuf,
        /// Print the parsed layout as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Row-density and pitch indexes of a layout.
    Indexes {
        file: PathBuf,
        /// Reference maxima CSV (model,refmax_rows,refmax_pitch_in) replacing the file's header values.
        #[arg(long, value_name = "CSV")]
        refs: Option<PathBuf>,
    },
    /// Passenger counts and shares by row and seat letter.
    Dispersion {
        /// CSV with row and letter columns and an optional count column.
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Total seats of a cabin described as pitch x rows x abreast zones.
    Capacity {
        /// Comma-separated zones, e.g. "34x7x6,31x24x6".
        #[arg(long)]
        zones: String,
    },
}

#[derive(Debug, Subcommand)]
enum SynthCommand {
    /// Generate a study dataset and its truth sidecar.
    Gen {
        /// Overrides the seed of the market file.
        #[arg(long)]
        seed: Option<u64>,
        /// Market parameters as `key = value` lines.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Dataset path; the truth sidecar is written next to it.
        #[arg(long, value_name = "CSV")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
struct EstimateArgs {
    #[command(subcommand)]
    sub: Option<EstimateCommand>,
    #[command(flatten)]
    run: LadderArgs,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Study dataset CSV.
    #[arg(long, value_name = "CSV")]
    data: Option<PathBuf>,
    /// Directory of .smap files keyed by file stem (default: bundled layouts).
    #[arg(long, value_name = "DIR")]
    maps: Option<PathBuf>,
    /// Largest share of rejected rows tolerated while loading.
    #[arg(long)]
    max_rejected_share: Option<f64>,
}

#[derive(Debug, Args)]
struct LadderArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Columns to estimate: "1..8", "6", "1,3,5" or "2-4".
    #[arg(long)]
    spec: Option<String>,
    /// Write the table here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// text, tsv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Subcommand)]
enum EstimateCommand {
    /// Compare recovered coefficients with a truth sidecar.
    Check {
        #[command(flatten)]
        data: DataArgs,
        /// Truth sidecar (default: the one written next to the dataset).
        #[arg(long, value_name = "JSON")]
        truth: Option<PathBuf>,
    },
}

/// Error with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_ESTIMATION: u8 = 3;

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
    fn estimation(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EXIT_USAGE, error: e.into() })
    }
    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EXIT_DATA, error: e.into() })
    }
    fn estimation(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EXIT_ESTIMATION, error: e.into() })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let settings = Settings::load(cli.config.as_deref()).usage()?;
    if let Some(n) = settings.pick(cli.threads, "threads").usage()? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().usage()?;
    }
    match cli.command {
        Command::Cabin(cmd) => commands::cabin(cmd),
        Command::Synth(SynthCommand::Gen { seed, config, out }) => {
            commands::synth_gen(seed, config.as_deref(), out, &settings)
        }
        Command::Estimate(EstimateArgs { sub: Some(EstimateCommand::Check { data, truth }), .. }) => {
            commands::estimate_check(&data, truth, &settings)
        }
        Command::Estimate(EstimateArgs { sub: None, run }) => commands::estimate(&run, &settings),
    }
}
