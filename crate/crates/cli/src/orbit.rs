use std::path::PathBuf;

use carousel_core::Alpha;
use carousel_dynamics::{
    carousel_state, integrate, ledger_csv, orbit_svg, periodicity_defect, states_csv, states_svg, winding_numbers,
    IntegrateOptions, NBody, PhaseState, StepStats, Trajectory, Windings,
};
use carousel_plan::{phase_scan, plan_rational, CarouselFamily, CarouselPlan};
use carousel_refine::{nbody_residual, refine_orbit, to_inertial, FourierPath, RefineOptions, RefineReport, RefinedOrbit};
use clap::{Args, Subcommand};
use serde::Serialize;

use crate::input::{family_and_plan, read_json, write_text, FamilyArgs, PlanArgs};
use crate::{emit, Failure};

#[derive(Subcommand, Debug)]
pub enum CarouselCommand {
    /// Frequencies, radii and winding numbers of a plan.
    Plan {
        #[arg(long, default_value = "3/2")]
        alpha: Alpha,
        #[command(flatten)]
        plan: PlanArgs,
        /// Plain-text table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Leading-order orbit sampled in time.
    Synthesize {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Time span; defaults to one period (or 2 pi for quasi-periodic plans).
        #[arg(long)]
        t_end: Option<f64>,
        #[command(flatten)]
        files: FileArgs,
    },
    /// Integrate the N-body equations from a carousel state.
    Simulate {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        plan: PlanArgs,
        /// Start from a refined orbit (JSON from `carousel refine --save`).
        #[arg(long)]
        from: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        periods: u32,
        #[command(flatten)]
        tol: TolArgs,
        /// Repeat the run at eps/2 and report the defect ratio.
        #[arg(long)]
        halving: bool,
        #[command(flatten)]
        files: FileArgs,
    },
    /// Fourier-Galerkin refinement followed by a check integration.
    Refine {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        plan: PlanArgs,
        /// Starting truncation.
        #[arg(long, default_value_t = 32)]
        l: usize,
        #[arg(long, default_value_t = 256)]
        max_l: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the refined orbit JSON here.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Skip the check integration.
        #[arg(long)]
        no_simulate: bool,
        /// Times per period at which the N-body residual is evaluated.
        #[arg(long, default_value_t = 256)]
        checks: usize,
        #[arg(long, default_value_t = 1e-14)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-16)]
        atol: f64,
        #[command(flatten)]
        files: FileArgs,
    },
    /// Averaged coupling over a grid of cluster phases.
    PhaseScan {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// Include every grid point.
        #[arg(long)]
        all: bool,
    },
}

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    #[arg(long, default_value_t = 1e-12)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-14)]
    atol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct FileArgs {
    /// Trajectory CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Inertial-frame orbit plot.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// First integrals CSV (integrations only).
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Serialize)]
struct PlanSummary<'a> {
    #[serde(flatten)]
    plan: &'a CarouselPlan,
    base_winding: Option<i64>,
    cluster_windings: Option<Vec<i64>>,
    first_order: Vec<(f64, f64)>,
}

fn plan_summary(plan: &CarouselPlan) -> PlanSummary<'_> {
    PlanSummary {
        plan,
        base_winding: plan.base_winding(),
        cluster_windings: plan.rational.map(|_| (1..=plan.n0()).filter_map(|j| plan.cluster_winding(j)).collect()),
        first_order: plan.first_order(),
    }
}

fn plan_table(plan: &CarouselPlan) -> String {
    let mut s = format!("alpha = {}\neps = {:.12e}\nnu = {:.12}\n", plan.alpha, plan.eps, plan.nu);
    match (plan.rational, plan.period) {
        (Some((p, q)), Some(t)) => s += &format!("nu = {p}/{q}, period = {t:.12}\nbase winding = {q}\n"),
        _ => s += "quasi-periodic\n",
    }
    s += "j  p_j  omega_j             r_j                 winding\n";
    for j in 0..plan.n0() {
        let w = plan.cluster_winding(j + 1).map_or("-".to_string(), |w| w.to_string());
        s += &format!(
            "{:<2} {:<4} {:<19.12} {:<19.12e} {}\n",
            j + 1,
            plan.p_list[j],
            plan.omega[j],
            plan.radii[j],
            w
        );
    }
    s
}

fn span(plan: &CarouselPlan, periods: u32) -> f64 {
    plan.period.unwrap_or(2.0 * std::f64::consts::PI) * periods as f64
}

#[derive(Serialize)]
struct Drift {
    energy: f64,
    angular_momentum: f64,
    momentum: f64,
}

#[derive(Serialize)]
struct RunSummary {
    eps: f64,
    t_end: f64,
    /// `max_i (m_i / m_max) |state_i(T) - state_i(0)|_inf`; absent for
    /// quasi-periodic plans.
    periodicity_defect: Option<f64>,
    drift: Drift,
    windings: Option<Windings>,
    steps: StepStats,
}

fn numeric<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Numeric(e.to_string())
}

fn run_from(fam: &CarouselFamily, plan: &CarouselPlan, s0: &PhaseState, periods: u32, opts: &IntegrateOptions) -> Result<(Trajectory, RunSummary), Failure> {
    let sys = NBody::with_index(fam.masses(), fam.alpha(), fam.index.clone(), &s0.q).map_err(numeric)?;
    let t_end = s0.t + span(plan, periods);
    let traj = integrate(&sys, s0, t_end, opts).map_err(numeric)?;
    let (energy, angular_momentum, momentum) = traj.max_drift();
    let periodic = plan.period.is_some();
    let defect = if periodic {
        Some(periodicity_defect(&traj, t_end - s0.t).map_err(numeric)?)
    } else {
        None
    };
    let windings = if periodic { Some(winding_numbers(&traj, plan).map_err(numeric)?) } else { None };
    let summary = RunSummary {
        eps: plan.eps,
        t_end,
        periodicity_defect: defect,
        drift: Drift { energy, angular_momentum, momentum },
        windings,
        steps: traj.stats,
    };
    Ok((traj, summary))
}

fn write_files(files: &FileArgs, traj: &Trajectory) -> Result<(), Failure> {
    if let Some(p) = &files.csv {
        write_text(p, &carousel_dynamics::trajectory_csv(traj, None).map_err(numeric)?)?;
    }
    if let Some(p) = &files.svg {
        write_text(p, &orbit_svg(traj, 4000).map_err(numeric)?)?;
    }
    if let Some(p) = &files.ledger {
        write_text(p, &ledger_csv(traj))?;
    }
    Ok(())
}

/// Rational plan with the same `p_j`, `q` and phases at half the `eps`.
fn halved(plan: &CarouselPlan) -> Result<CarouselPlan, Failure> {
    let (_, q) = plan.rational.ok_or_else(|| Failure::Input("--halving needs a periodic plan (--nu-p)".into()))?;
    let e = 0.5 * plan.eps;
    let nu = e.powf(-(plan.alpha.value() + 1.0) / 2.0) - 1.0;
    let p = (nu * q as f64).round() as i64;
    plan_rational(&plan.p_list, p, q, plan.alpha)
        .and_then(|pl| pl.with_phases(&plan.phases))
        .map_err(|e| Failure::Infeasible(e.to_string()))
}

#[derive(Serialize)]
struct Halving {
    eps: f64,
    periodicity_defect: f64,
    /// Defect at `eps` over defect at the halved `eps`.
    ratio: f64,
}

#[derive(Serialize)]
struct SimulateOutput {
    #[serde(flatten)]
    run: RunSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    halving: Option<Halving>,
}

#[derive(Serialize)]
struct RefineOutput {
    report: RefineReport,
    /// Largest `m_i |q_i'' - F_i/m_i|` over the check times.
    nbody_residual: f64,
    check: Option<RunSummary>,
}

#[derive(Serialize)]
struct ScanOutput {
    symmetry: Vec<usize>,
    grid: usize,
    degenerate: bool,
    spread: f64,
    minima: Vec<(Vec<f64>, f64)>,
    maxima: Vec<(Vec<f64>, f64)>,
    critical_candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<(Vec<f64>, f64)>>,
}

pub fn run(cmd: CarouselCommand, out: &Option<PathBuf>) -> Result<(), Failure> {
    match cmd {
        CarouselCommand::Plan { alpha, plan, table } => {
            let plan = plan.build(alpha)?;
            if table {
                let text = plan_table(&plan);
                match out {
                    Some(p) => write_text(p, &text),
                    None => {
                        print!("{text}");
                        Ok(())
                    }
                }
            } else {
                emit(out, &plan_summary(&plan))
            }
        }
        CarouselCommand::Synthesize { family, plan, samples, t_end, files } => {
            let (fam, plan) = family_and_plan(&family, &plan)?;
            let t_end = t_end.unwrap_or_else(|| span(&plan, 1));
            let n = samples.max(2);
            let states: Vec<PhaseState> =
                (0..n).map(|i| carousel_state(&fam, &plan, t_end * i as f64 / (n - 1) as f64)).collect();
            if let Some(p) = &files.csv {
                write_text(p, &states_csv(&fam.index, &states))?;
            }
            if let Some(p) = &files.svg {
                write_text(p, &states_svg(&fam.index, &states))?;
            }
            emit(out, &serde_json::json!({ "samples": n, "t_end": t_end, "plan": plan_summary(&plan) }))
        }
        CarouselCommand::Simulate { family, plan, from, periods, tol, halving, files } => {
            let opts = IntegrateOptions::tol(tol.rtol, tol.atol);
            let (fam, plan, s0) = match from {
                Some(path) => {
                    let orbit: RefinedOrbit = read_json(&path)?;
                    let s0 = to_inertial(&orbit.path, &orbit.plan, 0.0).map_err(numeric)?;
                    (orbit.family, orbit.plan, s0)
                }
                None => {
                    let (fam, plan) = family_and_plan(&family, &plan)?;
                    let s0 = carousel_state(&fam, &plan, 0.0);
                    (fam, plan, s0)
                }
            };
            let (traj, run) = run_from(&fam, &plan, &s0, periods, &opts)?;
            write_files(&files, &traj)?;
            let halving = if halving {
                let half = halved(&plan)?;
                let (_, r2) = run_from(&fam, &half, &carousel_state(&fam, &half, 0.0), periods, &opts)?;
                let d1 = run.periodicity_defect.unwrap_or(f64::NAN);
                let d2 = r2.periodicity_defect.unwrap_or(f64::NAN);
                Some(Halving { eps: half.eps, periodicity_defect: d2, ratio: d1 / d2 })
            } else {
                None
            };
            emit(out, &SimulateOutput { run, halving })
        }
        CarouselCommand::Refine { family, plan, l, max_l, tol, save, no_simulate, checks, rtol, atol, files } => {
            let (fam, plan) = family_and_plan(&family, &plan)?;
            let init = FourierPath::lift(&fam, &plan, l).map_err(|e| Failure::Input(e.to_string()))?;
            let opts = RefineOptions { l, max_l: max_l.max(l), tol, ..RefineOptions::default() };
            let orbit = refine_orbit(&init, &plan, &fam, &opts).map_err(numeric)?;
            if let Some(p) = &save {
                let text = serde_json::to_string_pretty(&orbit).map_err(numeric)?;
                write_text(p, &text)?;
            }
            let n = checks.max(1);
            let t1 = span(&plan, 1);
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let r = nbody_residual(&orbit.path, &plan, &fam, t1 * i as f64 / n as f64).map_err(numeric)?;
                worst = worst.max(r);
            }
            let check = if no_simulate {
                None
            } else {
                let s0 = to_inertial(&orbit.path, &plan, 0.0).map_err(numeric)?;
                let (traj, run) = run_from(&fam, &plan, &s0, 1, &IntegrateOptions::tol(rtol, atol))?;
                write_files(&files, &traj)?;
                Some(run)
            };
            emit(out, &RefineOutput { report: orbit.report, nbody_residual: worst, check })
        }
        CarouselCommand::PhaseScan { family, plan, grid, all } => {
            let (fam, plan) = family_and_plan(&family, &plan)?;
            if grid < 3 {
                return Err(Failure::Input("--grid must be at least 3".into()));
            }
            let scan = phase_scan(&fam, &plan, grid);
            let pick = |idx: &[usize]| idx.iter().map(|&i| scan.points[i].clone()).collect::<Vec<_>>();
            emit(
                out,
                &ScanOutput {
                    symmetry: scan.symmetry.clone(),
                    grid,
                    degenerate: scan.degenerate,
                    spread: scan.spread,
                    minima: pick(&scan.minima),
                    maxima: pick(&scan.maxima),
                    critical_candidates: scan.critical().len(),
                    points: all.then(|| scan.points.clone()),
                },
            )
        }
    }
}
