//! `nonadapt`: batch experiments for nonadaptive quantum query algorithms.
//!
//! Every subcommand writes one run record (JSON or CSV) to `--out` or
//! stdout. Exit codes: 0 pass, 1 bound or plan failure, 2 validation
//! error, 3 I/O or parse error.

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nonadapt_core::Error;

use output::Format;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn failure(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OverlapViolation { .. } | Error::OutsideClass(_) => 1,
            Error::Contract(_) | Error::Validation(_) => 2,
            Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 3,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nonadapt", version, about = "Nonadaptive quantum query simulator and verifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the weight budget and query floor for a state and a function.
    VerifyBound(VerifyBoundArgs),
    /// Exact recovery probability of van Dam's algorithm against the
    /// binomial closed form.
    Vandam(VandamArgs),
    /// Exact parity with ceil(n/2) queries.
    Parity(ParityArgs),
    /// One-query learner for linear functions.
    Bv(BvArgs),
    /// Turn a quantum learner into a classical query plan.
    Learn(LearnArgs),
    /// Smallest distinguishing set of a concept class, or one sampled
    /// from an amplitude profile.
    ExtractSet(ExtractSetArgs),
    /// Merge run records from a directory.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    Parity,
    And,
    Or,
    Majority,
}

#[derive(Args, Debug)]
pub struct VerifyBoundArgs {
    /// State file, then truth-table file.
    #[arg(long = "in", num_args = 1)]
    pub inputs: Vec<PathBuf>,

    /// Built-in function on the state's n variables, instead of a truth table.
    #[arg(long, value_enum)]
    pub function: Option<FunctionArg>,

    /// Measurement file; adds the measured worst-case error.
    #[arg(long)]
    pub meas: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VandamArgs {
    #[arg(long)]
    pub n: usize,

    /// Single query count; sweeps 0..=n when omitted.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ParityArgs {
    #[arg(long)]
    pub n: usize,

    /// Also write the algorithm's input state here.
    #[arg(long)]
    pub state_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BvArgs {
    /// Bits per query string; the input has 2^b - 1 visible positions.
    #[arg(long)]
    pub b: usize,

    /// Also write the concept class here.
    #[arg(long)]
    pub class_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    /// Concept-class file.
    #[arg(long = "in")]
    pub input: PathBuf,

    /// `bv`, `vandam`, or a path to an algorithm file.
    #[arg(long, default_value = "bv")]
    pub learner: String,

    /// Query count for the van Dam learner (defaults to n).
    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,

    /// Where to write the plan.
    #[arg(long)]
    pub plan: Option<PathBuf>,

    /// Sampling attempts before the greedy fallback.
    #[arg(long, default_value_t = 64)]
    pub retry_cap: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Args, Debug)]
pub struct ExtractSetArgs {
    /// Concept-class file.
    #[arg(long = "in")]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,

    /// JSON array `[p_0, ..., p_n]`; switches to sampling from it.
    #[arg(long)]
    pub profile: Option<PathBuf>,

    /// Draws for sampling; defaults to the count the union bound needs.
    #[arg(long)]
    pub draws: Option<usize>,

    /// Error level used to size the default draw count.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding run records.
    #[arg(long = "in")]
    pub input: PathBuf,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NONADAPT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::validation(format!("NONADAPT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::io(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let record = commands::dispatch(&cli)?;
    let bytes = output::render(&record, cli.format)?;
    output::emit(&bytes, cli.out.as_deref())?;
    Ok(record.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
