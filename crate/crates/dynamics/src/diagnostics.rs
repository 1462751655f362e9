use std::f64::consts::PI;

use carousel_core::Vec2;
use carousel_plan::{assemble_trajectory, assemble_velocity, CarouselFamily, CarouselPlan};
use serde::{Deserialize, Serialize};

use crate::{DynamicsError, PhaseState, Result, Trajectory};

/// Leading-order carousel state at time `t`.
pub fn carousel_state(family: &CarouselFamily, plan: &CarouselPlan, t: f64) -> PhaseState {
    let q = assemble_trajectory(family, plan, t).positions;
    let v = assemble_velocity(family, plan, t);
    PhaseState { t, q, v }
}

/// `max_i (m_i / m_max) max(|dq_i|_inf, |dv_i|_inf)`.
pub fn state_defect(a: &PhaseState, b: &PhaseState, masses: &[f64]) -> f64 {
    let mmax = masses.iter().copied().fold(0.0, f64::max);
    let mut d: f64 = 0.0;
    for i in 0..masses.len() {
        let dq = (a.q[i][0] - b.q[i][0]).abs().max((a.q[i][1] - b.q[i][1]).abs());
        let dv = (a.v[i][0] - b.v[i][0]).abs().max((a.v[i][1] - b.v[i][1]).abs());
        d = d.max(masses[i] / mmax * dq.max(dv));
    }
    d
}

/// Mass-weighted distance between the states at the start of `traj` and
/// a time `period` later.
pub fn periodicity_defect(traj: &Trajectory, period: f64) -> Result<f64> {
    let t0 = traj.t_min();
    let end = traj.state_at(t0 + period)?;
    Ok(state_defect(traj.first(), &end, &traj.masses))
}

/// Net turns over one period: of each cluster center about the origin,
/// and of the first member of each non-trivial cluster about its center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Windings {
    pub base: Vec<i64>,
    pub clusters: Vec<i64>,
    /// Largest distance of a turn count from its integer, in turns.
    pub residual: f64,
}

const MAX_RESIDUAL: f64 = 0.01;

fn unwrap_turns(angles: impl Iterator<Item = f64>) -> Result<f64> {
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    for a in angles {
        if let Some(p) = prev {
            let d = (a - p + PI).rem_euclid(2.0 * PI) - PI;
            if d.abs() > 0.5 * PI {
                return Err(DynamicsError::Ambiguous("angle jumps more than a quarter turn between samples".into()));
            }
            total += d;
        }
        prev = Some(a);
    }
    Ok(total / (2.0 * PI))
}

/// Winding numbers of a rational carousel over one period, read off the
/// integrated trajectory.
pub fn winding_numbers(traj: &Trajectory, plan: &CarouselPlan) -> Result<Windings> {
    let (period, (_, q)) = match (plan.period, plan.rational) {
        (Some(t), Some(r)) => (t, r),
        _ => return Err(DynamicsError::Invalid("winding numbers need a rational plan".into())),
    };
    let fastest = (1..=plan.n0()).filter_map(|j| plan.cluster_winding(j)).map(i64::abs).max().unwrap_or(0).max(q);
    let samples = 64 * (fastest as usize + 1);
    let t0 = traj.t_min();
    let states: Vec<PhaseState> =
        (0..=samples).map(|i| traj.state_at(t0 + period * i as f64 / samples as f64)).collect::<Result<_>>()?;
    let index = &traj.index;
    let scale = crate::diameter(&states[0].q).max(f64::MIN_POSITIVE);
    let center = |s: &PhaseState, j: usize| -> Vec2 {
        let r = index.range(j);
        let mt: f64 = traj.masses[r.clone()].iter().sum();
        let mut c = [0.0, 0.0];
        for i in r {
            c[0] += traj.masses[i] * s.q[i][0] / mt;
            c[1] += traj.masses[i] * s.q[i][1] / mt;
        }
        c
    };

    let mut residual: f64 = 0.0;
    let mut round = |turns: f64| {
        let w = turns.round();
        residual = residual.max((turns - w).abs());
        w as i64
    };
    let mut base = Vec::with_capacity(index.n());
    let mut clusters = Vec::new();
    for j in 1..=index.n() {
        let cs: Vec<Vec2> = states.iter().map(|s| center(s, j)).collect();
        if cs.iter().any(|c| c[0].hypot(c[1]) < 1e-9 * scale) {
            return Err(DynamicsError::Ambiguous(format!("center of cluster {j} passes through the origin")));
        }
        base.push(round(unwrap_turns(cs.iter().map(|c| c[1].atan2(c[0])))?));
        if index.size(j) > 1 {
            let first = index.range(j).start;
            let rel: Vec<Vec2> =
                states.iter().zip(&cs).map(|(s, c)| [s.q[first][0] - c[0], s.q[first][1] - c[1]]).collect();
            if rel.iter().any(|d| d[0].hypot(d[1]) < 1e-12 * scale) {
                return Err(DynamicsError::Ambiguous(format!("member 1 of cluster {j} meets its center")));
            }
            clusters.push(round(unwrap_turns(rel.iter().map(|d| d[1].atan2(d[0])))?));
        }
    }
    if residual > MAX_RESIDUAL {
        return Err(DynamicsError::Ambiguous(format!("turn counts are {residual:.3} turns from integers")));
    }
    Ok(Windings { base, clusters, residual })
}
