//! Command-line front end for exact method-of-types computations.
//!
//! Every subcommand reads one TOML problem-spec file (`--spec`) and emits
//! one table, as CSV or aligned text. Runs are deterministic: the worker
//! count (`--jobs`) never changes a single emitted byte.
//!
//! Exit codes: 0 on success, 2 for validation failures (bad flags, bad
//! spec files, violated preconditions), 3 for computation failures
//! (solver breakdown, conditioning on a massless set, output IO).

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use motkit::BallConvention;
use output::{Format, LogBase};

/// Failure class, mapped to the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: flags, spec file, or violated preconditions. Exit 2.
    Validation,
    /// The computation itself failed, or output could not be written.
    /// Exit 3.
    Computation,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: String) -> CliError {
        CliError { kind: ErrorKind::Validation, message }
    }

    pub fn computation(message: String) -> CliError {
        CliError { kind: ErrorKind::Computation, message }
    }
}

impl From<motkit::Error> for CliError {
    fn from(e: motkit::Error) -> CliError {
        use motkit::Error::*;
        let kind = match &e {
            DimensionMismatch { .. }
            | InvalidWeight { .. }
            | MassNotNormalized { .. }
            | EmptySupport
            | DuplicateLetter(_)
            | InvalidCounts { .. }
            | ZeroScale
            | InvalidPrior(_)
            | UnsupportedSetExpression(_)
            | SubsequenceViolation { .. }
            | InvalidPartition(_)
            | InvalidParameter(_) => ErrorKind::Validation,
            InfeasibleConstraints(_)
            | SupportCondition(_)
            | SolverFailure { .. }
            | ConditioningOnNull
            | EmptyFeasibleSet => ErrorKind::Computation,
        };
        CliError { kind, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(
    name = "motkit",
    version,
    about = "Exact method-of-types computations: projections, posteriors of rare source sets, \
             and numerical demonstrations of their limit laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem-spec file (TOML; exact numbers as rational strings like "17/10").
    #[arg(long, global = true, value_name = "PATH")]
    spec: Option<PathBuf>,

    /// What the ball radius bounds: the L1 distance, or half of it.
    #[arg(long, global = true, value_enum, default_value_t = BallArg::L1)]
    ball: BallArg,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Base for displayed rates and log quantities (natural log, or bits).
    #[arg(long, global = true, value_enum, default_value_t = LogBaseArg::E)]
    log_base: LogBaseArg,

    /// Worker threads for per-n parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N",
          value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Write the table to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Posterior mass of a ball around the dominant source, per scheduled n
    Table1,
    /// I- or L-projection of the observed type onto the conditioning set
    Project {
        #[arg(value_enum)]
        which: ProjectionKind,
    },
    /// Decay-rate series with finite-n sandwich bounds and the predicted limit
    Sanov {
        #[arg(value_enum)]
        side: SanovSide,
    },
    /// Posterior-mode source within the conditioning set
    Map,
    /// List the conditioning set's lattice members at one sample size
    Enumerate,
    /// Quantize a continuous sample batch onto the partition's alphabet
    Quantize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProjectionKind {
    /// Minimize I(q || observed): exponential-family solve.
    I,
    /// Maximize per-letter log-likelihood: reciprocal-affine solve.
    L,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SanovSide {
    /// Posterior decay of an event set of sources.
    Sources,
    /// Probability decay of a rare set of empirical types.
    Types,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BallArg {
    HalfL1,
    L1,
}

impl From<BallArg> for BallConvention {
    fn from(b: BallArg) -> BallConvention {
        match b {
            BallArg::HalfL1 => BallConvention::HalfL1,
            BallArg::L1 => BallConvention::L1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Text,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Text => Format::Text,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LogBaseArg {
    E,
    #[value(name = "2")]
    Two,
}

impl From<LogBaseArg> for LogBase {
    fn from(b: LogBaseArg) -> LogBase {
        match b {
            LogBaseArg::E => LogBase::E,
            LogBaseArg::Two => LogBase::Two,
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let spec = cli
        .spec
        .as_ref()
        .ok_or_else(|| CliError::validation("--spec PATH is required".into()))?;
    let problem = config::Problem::load(spec)?;
    let ball: BallConvention = cli.ball.into();
    let jobs = cli.jobs.map(|j| j as usize);
    let mut doc = match &cli.command {
        Command::Table1 => run::cmd_table1(&problem, ball, jobs)?,
        Command::Project { which } => run::cmd_project(&problem, *which, ball)?,
        Command::Sanov { side } => run::cmd_sanov(&problem, *side, ball, jobs)?,
        Command::Map => run::cmd_map(&problem, ball, jobs)?,
        Command::Enumerate => run::cmd_enumerate(&problem, ball)?,
        Command::Quantize => run::cmd_quantize(&problem)?,
    };
    // The spec's own title leads the text rendering; CSV stays a bare table.
    if let Some(title) = &problem.spec.title {
        doc.title = format!("{title}\n{}", doc.title);
    }
    let rendered = doc.render(cli.format.into(), cli.log_base.into());
    output::emit(&rendered, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            match e.kind {
                ErrorKind::Validation => ExitCode::from(2),
                ErrorKind::Computation => ExitCode::from(3),
            }
        }
    }
}
