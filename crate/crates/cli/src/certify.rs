use std::path::PathBuf;

use carousel_cc::lagrange_config;
use carousel_core::Alpha;
use carousel_spectral::{
    certify_a0, certify_general, certify_lagrange, certify_polygon_grav_range, certify_polygon_weak, verdict_of_all,
    CertResult, GravOptions, Precision, Verdict,
};
use clap::Subcommand;
use serde::Serialize;

use crate::input::{parse_range, read_config};
use crate::{emit, Failure};

#[derive(Subcommand, Debug)]
pub enum CertifyCommand {
    /// 2 pi p check of the k-gon for a weak force (1 <= alpha < 2).
    PolygonWeak {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        alpha: Alpha,
    },
    /// Rigorous 2 pi/m check of the Newtonian k-gon, one k or a range.
    PolygonGrav {
        #[arg(long, conflicts_with = "k_range")]
        k: Option<usize>,
        /// Inclusive range such as 4..1000.
        #[arg(long, value_parser = parse_range)]
        k_range: Option<std::ops::RangeInclusive<usize>>,
        #[arg(long, default_value_t = 2)]
        m: i64,
        /// Enclose every mode up to sqrt(beta_j^2 + 1) instead of stopping at
        /// the provable bound.
        #[arg(long)]
        full_range: bool,
        /// Include every per-k result in the output.
        #[arg(long)]
        detail: bool,
    },
    /// 2 pi p check of the Lagrange triangle.
    Lagrange {
        #[arg(long, value_delimiter = ',')]
        masses: Vec<f64>,
        #[arg(long)]
        alpha: Alpha,
        #[arg(long, default_value_t = 1)]
        p: i64,
    },
    /// Nondegeneracy of a base configuration as a critical point.
    A0 {
        /// Configuration JSON.
        #[arg(long = "in", conflicts_with = "masses")]
        input: Option<PathBuf>,
        /// Lagrange triangle with these masses instead of a file.
        #[arg(long, value_delimiter = ',')]
        masses: Option<Vec<f64>>,
        #[arg(long, default_value = "3/2")]
        alpha: Alpha,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Numerical 2 pi p check of an arbitrary configuration.
    General {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: i64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Serialize)]
struct RangeSummary {
    verdict: Verdict,
    k_min: usize,
    k_max: usize,
    m: i64,
    precision: Precision,
    count: usize,
    certified: usize,
    /// Smallest margin over the range and the `k` where it occurs.
    worst_margin: f64,
    worst_k: usize,
    not_certified: Vec<CertResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<Vec<CertResult>>,
    seconds: f64,
}

fn gate(v: Verdict) -> Result<(), Failure> {
    match v {
        Verdict::Certified => Ok(()),
        Verdict::Refuted => Err(Failure::Refuted),
        Verdict::Inconclusive => Err(Failure::Inconclusive),
    }
}

pub fn run(cmd: CertifyCommand, out: &Option<PathBuf>) -> Result<(), Failure> {
    let invalid = |e: carousel_spectral::SpectralError| Failure::Input(e.to_string());
    match cmd {
        CertifyCommand::PolygonWeak { k, p, alpha } => {
            let r = certify_polygon_weak(k, p, alpha).map_err(invalid)?;
            emit(out, &r)?;
            gate(r.verdict)
        }
        CertifyCommand::PolygonGrav { k, k_range, m, full_range, detail } => {
            let ks = match (k, k_range) {
                (Some(k), _) => k..=k,
                (None, Some(r)) => r,
                (None, None) => return Err(Failure::Input("give --k or --k-range".into())),
            };
            let precision = Precision::from_env().map_err(invalid)?;
            let start = std::time::Instant::now();
            let results = certify_polygon_grav_range(ks.clone(), m, precision, GravOptions { full_range })
                .into_iter()
                .collect::<Result<Vec<_>, _>>()
                .map_err(invalid)?;
            let seconds = start.elapsed().as_secs_f64();
            if k.is_some() {
                emit(out, &results[0])?;
                return gate(results[0].verdict);
            }
            let verdict = verdict_of_all(&results);
            let (worst_k, worst_margin) = ks
                .clone()
                .zip(&results)
                .map(|(k, r)| (k, r.margin))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            let summary = RangeSummary {
                verdict,
                k_min: *ks.start(),
                k_max: *ks.end(),
                m,
                precision,
                count: results.len(),
                certified: results.iter().filter(|r| r.verdict == Verdict::Certified).count(),
                worst_margin,
                worst_k,
                not_certified: results.iter().filter(|r| r.verdict != Verdict::Certified).cloned().collect(),
                results: detail.then(|| results.clone()),
                seconds,
            };
            emit(out, &summary)?;
            gate(verdict)
        }
        CertifyCommand::Lagrange { masses, alpha, p } => {
            let [m1, m2, m3] = masses[..] else {
                return Err(Failure::Input(format!("need three masses, got {}", masses.len())));
            };
            let c = certify_lagrange(m1, m2, m3, alpha, p).map_err(invalid)?;
            emit(out, &c)?;
            gate(c.result.verdict)
        }
        CertifyCommand::A0 { input, masses, alpha, tol } => {
            let cc = match (input, masses) {
                (Some(path), _) => read_config(&path)?,
                (None, Some(m)) if m.len() == 3 => {
                    lagrange_config(m[0], m[1], m[2], alpha).map_err(|e| Failure::Infeasible(e.to_string()))?
                }
                _ => return Err(Failure::Input("give --in FILE or three --masses".into())),
            };
            let r = certify_a0(&cc, tol).map_err(invalid)?;
            emit(out, &r)?;
            gate(r.verdict)
        }
        CertifyCommand::General { input, p, tol } => {
            let cc = read_config(&input)?;
            let r = certify_general(&cc, p, tol).map_err(invalid)?;
            emit(out, &r)?;
            gate(r.verdict)
        }
    }
}
