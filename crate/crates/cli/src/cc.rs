use std::path::PathBuf;

use carousel_cc::{lagrange_config, polygon_config_with_mass, solve_central_config, SolveOptions};
use carousel_core::Alpha;
use clap::Subcommand;
use serde::Serialize;

use crate::input::{read_config, read_json, RawConfig};
use crate::{emit, Failure};

#[derive(Subcommand, Debug)]
pub enum CcCommand {
    /// Regular k-gon with equal masses.
    Polygon {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: Alpha,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
    },
    /// Equilateral triangle with three masses.
    Lagrange {
        #[arg(long, value_delimiter = ',')]
        masses: Vec<f64>,
        #[arg(long)]
        alpha: Alpha,
    },
    /// Newton solve from an initial guess (JSON with alpha, masses, positions).
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
    },
    /// Recompute the residual of a stored configuration.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Residual accepted as a central configuration.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Serialize)]
struct Verification {
    residual: f64,
    tol: f64,
    ok: bool,
    bodies: usize,
    alpha: Alpha,
}

pub fn run(cmd: CcCommand, out: &Option<PathBuf>) -> Result<(), Failure> {
    let solver = |e: carousel_cc::CcError| Failure::Infeasible(e.to_string());
    match cmd {
        CcCommand::Polygon { k, alpha, mass } => emit(out, &polygon_config_with_mass(k, alpha, mass).map_err(solver)?),
        CcCommand::Lagrange { masses, alpha } => {
            let [m1, m2, m3] = masses[..] else {
                return Err(Failure::Input(format!("need three masses, got {}", masses.len())));
            };
            emit(out, &lagrange_config(m1, m2, m3, alpha).map_err(solver)?)
        }
        CcCommand::Solve { input, tol, max_iter } => {
            let raw: RawConfig = read_json(&input)?;
            let cc = solve_central_config(&raw.positions, &raw.masses, raw.alpha, SolveOptions { tol, max_iter })
                .map_err(solver)?;
            emit(out, &cc)
        }
        CcCommand::Verify { input, tol } => {
            let cc = read_config(&input)?;
            emit(
                out,
                &Verification {
                    residual: cc.residual,
                    tol,
                    ok: cc.residual < tol,
                    bodies: cc.len(),
                    alpha: cc.alpha,
                },
            )
        }
    }
}
