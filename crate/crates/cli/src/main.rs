//! `carousel`: central configurations, nondegeneracy certificates and
//! carousel orbits from the command line.
//!
//! Exit codes: 0 ok, 2 bad input or infeasible request, 3 refuted,
//! 4 inconclusive, 5 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

mod cc;
mod certify;
mod input;
mod orbit;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("refuted")]
    Refuted,
    #[error("inconclusive")]
    Inconclusive,
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) | Failure::Infeasible(_) => 2,
            Failure::Refuted => 3,
            Failure::Inconclusive => 4,
            Failure::Numeric(_) => 5,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "carousel", version, about = "Carousel orbits of the N-body problem with homogeneous forces")]
struct Cli {
    /// Worker threads for k-range sweeps and phase scans (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate, solve and check central configurations.
    #[command(subcommand)]
    Cc(cc::CcCommand),
    /// Nondegeneracy certificates.
    #[command(subcommand)]
    Certify(certify::CertifyCommand),
    /// Plan, build, integrate and refine carousel orbits.
    #[command(subcommand)]
    Carousel(orbit::CarouselCommand),
}

/// Prints (or writes) `value` as pretty JSON.
pub fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numeric(e.to_string()))?;
    match out {
        Some(path) => input::write_text(path, &(text + "\n")),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Input(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Cc(c) => cc::run(c, &cli.out),
        Command::Certify(c) => certify::run(c, &cli.out),
        Command::Carousel(c) => orbit::run(c, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n.max(1));
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| run(cli)),
        Err(e) => Err(Failure::Input(format!("cannot start {} worker threads: {e}", cli.jobs.unwrap_or(0)))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("carousel: {e}");
            ExitCode::from(e.code())
        }
    }
}
