//! biaslab command-line tool: analyze structural models, run seeded
//! simulations, query graphs, and regenerate the standard bias tables.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Format;

/// Exit-code taxonomy: 1 usage, 2 model/data, 3 internal invariant.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<biaslab::Error> for CliError {
    fn from(e: biaslab::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "biaslab",
    version,
    about = "Structural-causal-model laboratory: bias amplification, selection bias, \
             d-separation, and instrument-sensitivity diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,

    /// Write output here instead of stdout (a directory when the command
    /// emits several tables).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; falls back to $BIASLAB_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form bias report for a model (or a nonlinear specification).
    Analyze(commands::AnalyzeArgs),
    /// Seeded Monte Carlo slope experiment against the analytic values.
    Simulate(commands::SimulateArgs),
    /// d-separation query: `biaslab dsep --model M "A _||_ B | C,D"`.
    Dsep(commands::DsepArgs),
    /// Bias-channel taxonomy: `biaslab taxonomy --model M "X -> Y | S1"`.
    Taxonomy(commands::TaxonomyArgs),
    /// Amplifier/reducer verdict for an (imperfect-)instrument model.
    Classify(commands::ClassifyArgs),
    /// Instrument-sensitivity test (and optional covariate screen) on CSV data.
    Diagnose(commands::DiagnoseArgs),
    /// Regenerate the standard table suite (amplification ladder, reducer
    /// threshold sweep, nonlinear bias grid, selection surface, instrument
    /// invariance).
    Reproduce(commands::ReproduceArgs),
}

/// Seed resolution: flag, then $BIASLAB_SEED, then 42.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("BIASLAB_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("BIASLAB_SEED must be an integer, got {text:?}"))),
        Err(_) => Ok(42),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = resolve_seed(cli.seed)?;
    let out = match &cli.command {
        Command::Analyze(args) => commands::analyze(args)?,
        Command::Simulate(args) => commands::simulate(args, seed)?,
        Command::Dsep(args) => commands::dsep(args)?,
        Command::Taxonomy(args) => commands::taxonomy(args)?,
        Command::Classify(args) => commands::classify(args)?,
        Command::Diagnose(args) => commands::diagnose(args, seed)?,
        Command::Reproduce(args) => commands::reproduce(args, seed)?,
    };
    output::emit(&out, cli.format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("ERROR:1:{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR:{}:{}", e.code(), e.message());
            ExitCode::from(e.code())
        }
    }
}
