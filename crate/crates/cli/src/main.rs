mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::FileConfig;

/// Iterated Stratonovich integrals and strong Taylor–Stratonovich schemes.
#[derive(Parser, Debug)]
#[command(name = "stratsim", version)]
struct Cli {
    /// Flat `key = value` file mirroring the long flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Export the exact coefficient table of one integral family.
    GenCoeffs(GenCoeffsArgs),
    /// Mean-square errors per truncation level and the selected levels.
    Errors(ErrorsArgs),
    /// Simulate paths of a builtin problem.
    Simulate(SimulateArgs),
    /// Strong convergence experiment against an exact solution.
    Converge(ConvergeArgs),
    /// Monte-Carlo validation of the error formulas.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct GenCoeffsArgs {
    /// Weight exponents, innermost first, e.g. `010`.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    q: Option<usize>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ErrorsArgs {
    /// Comma-separated families (default: all twelve scheme families).
    #[arg(long)]
    weights: Option<String>,
    /// Levels to tabulate: `N`, `a..b` or `a,b,c`.
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "c-target")]
    c_target: Option<f64>,
    /// Noise dimension that bounds the index patterns considered.
    #[arg(long)]
    m: Option<usize>,
    /// Adds Monte-Carlo columns when given.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SchemeArgs {
    /// Builtin problem id: gbm, drift, decay, bilinear2.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    order: Option<String>,
    /// Uniform truncation level; chosen from `--c-target` if omitted.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long = "c-target")]
    c_target: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Comma-separated initial state.
    #[arg(long)]
    x0: Option<String>,
    /// Drift rate of `gbm`.
    #[arg(long)]
    alpha: Option<f64>,
    /// Volatility of `gbm`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Comma-separated, strictly decreasing step sizes.
    #[arg(long)]
    deltas: Option<String>,
    /// Fail (exit 3) when a conclusive fit is below this order.
    #[arg(long = "min-order")]
    min_order: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// `published`, `formulas` or `all`.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed run: message plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const USAGE: u8 = 1;
    pub const NUMERIC: u8 = 2;
    pub const ACCEPTANCE: u8 = 3;

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: Self::NUMERIC,
            message: message.into(),
        }
    }

    pub fn acceptance(message: impl Into<String>) -> Self {
        Self {
            code: Self::ACCEPTANCE,
            message: message.into(),
        }
    }
}

impl From<stratsim::Error> for Failure {
    fn from(e: stratsim::Error) -> Self {
        match e {
            stratsim::Error::NonFinite(_) => Failure::numeric(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("i/o error: {e}"))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(n) = file.pick(cli.threads, "threads")? {
        if n == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::GenCoeffs(a) => commands::gen_coeffs(a, &file),
        Command::Errors(a) => commands::errors(a, &file),
        Command::Simulate(a) => commands::simulate(a, &file),
        Command::Converge(a) => commands::converge(a, &file),
        Command::Validate(a) => commands::validate(a, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Failure::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("stratsim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
