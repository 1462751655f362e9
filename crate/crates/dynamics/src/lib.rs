//! Planar power-law N-body dynamics: forces, first integrals, an adaptive
//! eighth-order integrator with dense output, and periodicity diagnostics.

use carousel_core::{Alpha, ClusterIndex, CoreError, Vec2};
use serde::{Deserialize, Serialize};

mod diagnostics;
mod export;
mod integrator;
mod tableau;

pub use diagnostics::{carousel_state, periodicity_defect, state_defect, winding_numbers, Windings};
pub use export::{ledger_csv, orbit_svg, states_csv, states_svg, trajectory_csv};
pub use integrator::{dop853, integrate, DenseSegment, IntegrateOptions, Solution, StepStats, Trajectory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("collision between bodies {i} and {j} at distance {dist:e} (t = {t})")]
    Collision { i: usize, j: usize, dist: f64, t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("trajectory covers [{lo}, {hi}], need t = {t}")]
    OutOfRange { lo: f64, hi: f64, t: f64 },
    #[error("ambiguous winding: {0}")]
    Ambiguous(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Positions and velocities of all bodies at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub q: Vec<Vec2>,
    pub v: Vec<Vec2>,
}

impl PhaseState {
    pub fn new(t: f64, q: Vec<Vec2>, v: Vec<Vec2>) -> Result<PhaseState> {
        if q.len() != v.len() {
            return Err(DynamicsError::Invalid(format!("{} positions but {} velocities", q.len(), v.len())));
        }
        let s = PhaseState { t, q, v };
        if !s.is_finite() {
            return Err(DynamicsError::NonFinite(t));
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.v).all(|x| x[0].is_finite() && x[1].is_finite())
    }

    /// `[q_1, .., q_N, v_1, .., v_N]` flattened.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(4 * self.len());
        for x in self.q.iter().chain(&self.v) {
            y.extend_from_slice(x);
        }
        y
    }

    pub fn from_flat(t: f64, y: &[f64]) -> PhaseState {
        let n = y.len() / 4;
        let q = (0..n).map(|i| [y[2 * i], y[2 * i + 1]]).collect();
        let v = (0..n).map(|i| [y[2 * n + 2 * i], y[2 * n + 2 * i + 1]]).collect();
        PhaseState { t, q, v }
    }
}

/// Closest pair `(i, j, distance)`.
pub fn closest_pair(q: &[Vec2]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let d = (q[i][0] - q[j][0]).hypot(q[i][1] - q[j][1]);
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

pub fn diameter(q: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            d = d.max((q[i][0] - q[j][0]).hypot(q[i][1] - q[j][1]));
        }
    }
    d
}

/// Accelerations `a_i = -sum_j m_j (q_i - q_j) / |q_i - q_j|^(alpha+1)`,
/// written into `acc`. Errors on a pair closer than `min_dist`.
pub fn accelerations_into(q: &[Vec2], masses: &[f64], alpha: Alpha, min_dist: f64, acc: &mut [Vec2]) -> Result<()> {
    acc.iter_mut().for_each(|a| *a = [0.0, 0.0]);
    let min2 = min_dist * min_dist;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let dx = q[i][0] - q[j][0];
            let dy = q[i][1] - q[j][1];
            let r2 = dx * dx + dy * dy;
            if !(r2 > min2) {
                return Err(DynamicsError::Collision { i, j, dist: r2.sqrt(), t: f64::NAN });
            }
            let w = alpha.pair_weight(r2);
            let (fx, fy) = (w * dx, w * dy);
            acc[i][0] -= masses[j] * fx;
            acc[i][1] -= masses[j] * fy;
            acc[j][0] += masses[i] * fx;
            acc[j][1] += masses[i] * fy;
        }
    }
    Ok(())
}

/// Accelerations of the N-body problem; fails only on coincident bodies.
pub fn rhs(q: &[Vec2], masses: &[f64], alpha: Alpha) -> Result<Vec<Vec2>> {
    let mut acc = vec![[0.0, 0.0]; q.len()];
    accelerations_into(q, masses, alpha, 0.0, &mut acc)?;
    Ok(acc)
}

/// Energy `K - U`, angular momentum `sum m <v, Jq>`, linear momentum and
/// center of mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub energy: f64,
    pub angular_momentum: f64,
    pub linear_momentum: Vec2,
    pub com: Vec2,
}

pub fn invariants_of(state: &PhaseState, masses: &[f64], alpha: Alpha) -> Invariants {
    let (q, v) = (&state.q, &state.v);
    let mut kin = 0.0;
    let mut ang = 0.0;
    let mut p = [0.0, 0.0];
    let mut c = [0.0, 0.0];
    let mt: f64 = masses.iter().sum();
    for i in 0..q.len() {
        let m = masses[i];
        kin += 0.5 * m * (v[i][0] * v[i][0] + v[i][1] * v[i][1]);
        ang += m * (q[i][0] * v[i][1] - q[i][1] * v[i][0]);
        p[0] += m * v[i][0];
        p[1] += m * v[i][1];
        c[0] += m * q[i][0] / mt;
        c[1] += m * q[i][1] / mt;
    }
    let mut u = 0.0;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            u += masses[i] * masses[j] * alpha.phi((q[i][0] - q[j][0]).hypot(q[i][1] - q[j][1]));
        }
    }
    Invariants { energy: kin - u, angular_momentum: ang, linear_momentum: p, com: c }
}

/// An N-body system with its cluster layout and collision threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NBody {
    pub masses: Vec<f64>,
    pub alpha: Alpha,
    pub index: ClusterIndex,
    /// Integration aborts when two bodies come closer than this.
    pub min_dist: f64,
}

/// Collision threshold relative to the initial diameter.
pub const COLLISION_FACTOR: f64 = 1e-8;

impl NBody {
    /// System with one body per cluster and a threshold of
    /// `1e-8` times the diameter of `q0`.
    pub fn new(masses: Vec<f64>, alpha: Alpha, q0: &[Vec2]) -> Result<NBody> {
        let index = ClusterIndex::new(vec![1; masses.len()])?;
        NBody::with_index(masses, alpha, index, q0)
    }

    pub fn with_index(masses: Vec<f64>, alpha: Alpha, index: ClusterIndex, q0: &[Vec2]) -> Result<NBody> {
        if masses.len() != index.total() || q0.len() != masses.len() {
            return Err(DynamicsError::Invalid("masses, layout and positions disagree in size".into()));
        }
        if let Some(&m) = masses.iter().find(|&&m| !(m > 0.0 && m.is_finite())) {
            return Err(CoreError::InvalidMass(m).into());
        }
        Ok(NBody { masses, alpha, index, min_dist: COLLISION_FACTOR * diameter(q0) })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// First-order form `y' = f(t, y)` on the flat state.
    pub fn derivative(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.len();
        let (q, v) = y.split_at(2 * n);
        dy[..2 * n].copy_from_slice(v);
        let qv: &[Vec2] = as_vec2(q);
        let acc: &mut [Vec2] = as_vec2_mut(&mut dy[2 * n..]);
        accelerations_into(qv, &self.masses, self.alpha, self.min_dist, acc).map_err(|e| match e {
            DynamicsError::Collision { i, j, dist, .. } => DynamicsError::Collision { i, j, dist, t },
            e => e,
        })
    }

    pub fn invariants(&self, s: &PhaseState) -> Invariants {
        invariants_of(s, &self.masses, self.alpha)
    }
}

fn as_vec2(x: &[f64]) -> &[Vec2] {
    x.as_chunks::<2>().0
}

fn as_vec2_mut(x: &mut [f64]) -> &mut [Vec2] {
    x.as_chunks_mut::<2>().0
}
