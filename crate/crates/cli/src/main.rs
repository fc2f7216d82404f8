//! `metivier`: batch driver for the projector, norm, bound and mixed-norm
//! experiments.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 for
//! usage, config or domain errors.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "metivier", version, about = "Special Hermite projector and restriction-bound experiments")]
struct Cli {
    /// Key-value config file (one `key = value` per line).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSV files and the JSON summary.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for every random draw.
    #[arg(long, global = true, value_name = "U64", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Idempotency, orthogonality, reconstruction and eigen-relation suites.
    VerifyProjectors,
    /// Growth of projector norms in the degree k and in lambda.
    NormScaling,
    /// Regime slopes of the series bound against the predicted exponents.
    BoundScaling,
    /// Metivier and H-type verdicts for a step-two algebra.
    MetivierCheck {
        /// Built-in algebra: muller-seeger, heisenberg or zero.
        #[arg(long, default_value = "muller-seeger", conflicts_with = "algebra")]
        fixture: String,
        /// Algebra file with keys n, d, J1 .. Jd (row-major).
        #[arg(long, value_name = "PATH")]
        algebra: Option<PathBuf>,
    },
    /// Empirical mixed-norm ratios of the restriction operator.
    Mixnorm,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(metivier_core::Error),
    Io(String),
}

impl From<metivier_core::Error> for Failure {
    fn from(e: metivier_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(m) => write!(f, "io: {m}"),
        }
    }
}

pub struct Context {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: usage: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure threads: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Context { config: cli.config, out: cli.out, seed: cli.seed };
    let result = match cli.command {
        Command::VerifyProjectors => commands::verify_projectors(&ctx),
        Command::NormScaling => commands::norm_scaling(&ctx),
        Command::BoundScaling => commands::bound_scaling(&ctx),
        Command::MetivierCheck { fixture, algebra } => commands::metivier_check(&ctx, &fixture, algebra.as_deref()),
        Command::Mixnorm => commands::mixnorm(&ctx),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
