//! Command-line front end: instance files in, JSON reports out.

pub mod commands;
pub mod io;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_UNSOLVABLE: i32 = 4;
pub const EXIT_BREAKDOWN: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("numerical tolerance breakdown: {0}")]
    Breakdown(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Breakdown(_) => EXIT_BREAKDOWN,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<usd_cbs::Error> for CliError {
    fn from(e: usd_cbs::Error) -> Self {
        match e {
            usd_cbs::Error::ToleranceBreakdown(m) => CliError::Breakdown(m),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Indented JSON
    Json,
    /// Single-line JSON
    Compact,
}

#[derive(Debug, Parser)]
#[command(name = "usd-cbs", version, about = "Two-dimensional common block structures and unambiguous discrimination of two mixed states")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Relative tolerance for commutator norms
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_comm: f64,
    /// Relative tolerance for rank decisions
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_rank: f64,
    /// Also apply the pinching reductions tau1 and tau2
    #[arg(long, global = true)]
    pub tau12: bool,
    /// Cross-check the solution against the brute-force optimizer (dimension <= 6)
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Seed for instance generation and oracle starting points
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Human-readable summary on stderr
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the commutator criteria and extract the block structure
    Analyze {
        input: PathBuf,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve unambiguous discrimination block by block
    Solve {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a state-comparison instance
    Compare {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        c: usize,
        #[arg(long)]
        theta: f64,
        /// Write the instance here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        analyze: bool,
        #[arg(long)]
        solve: bool,
    },
    /// Generate a random instance with a known block structure
    Gen {
        /// Per-block ranks, e.g. "1,1/2,0"
        #[arg(long)]
        blocks: String,
        /// Write the instance here and the ground truth next to it
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        analyze: bool,
        #[arg(long)]
        solve: bool,
    },
}

/// Parses arguments, runs the command, prints, and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            if let Some(summary) = &out.summary {
                if cli.global.verbose {
                    eprint!("{summary}");
                }
            }
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
