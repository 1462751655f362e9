use carousel_core::{Alpha, ClusterIndex};
use serde::{Deserialize, Serialize};

use crate::tableau::{A, C, D, E3, E5, STAGES, STAGES_EXT};
use crate::{DynamicsError, Invariants, NBody, PhaseState, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
/// `-1 / (q + 1)` with `q = 7` the order of the error estimate.
const ERR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    /// Constant steps without error control (used for order checks).
    pub fixed_step: Option<f64>,
    /// Keep the interpolant of every step.
    pub dense: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 5_000_000,
            h0: None,
            h_max: f64::INFINITY,
            fixed_step: None,
            dense: true,
        }
    }
}

impl IntegrateOptions {
    pub fn tol(rtol: f64, atol: f64) -> Self {
        IntegrateOptions { rtol, atol, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Seventh-degree interpolant over one step.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub t1: f64,
    y0: Vec<f64>,
    /// Seven coefficient rows of length `n`, stored flat.
    coef: Vec<f64>,
}

impl DenseSegment {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let n = self.y0.len();
        let x = (t - self.t0) / (self.t1 - self.t0);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, row) in self.coef.chunks_exact(n).rev().enumerate() {
            let w = if i % 2 == 0 { x } else { 1.0 - x };
            for (o, r) in out.iter_mut().zip(row) {
                *o = (*o + r) * w;
            }
        }
        for (o, y) in out.iter_mut().zip(&self.y0) {
            *o += y;
        }
    }

    fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 { (self.t0, self.t1) } else { (self.t1, self.t0) };
        lo <= t && t <= hi
    }
}

/// Accepted steps of a run: times, states and interpolants, in the order
/// they were produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub segments: Vec<DenseSegment>,
    pub stats: StepStats,
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    (v.map(|x| x * x).sum::<f64>() / n as f64).sqrt()
}

/// Dormand-Prince 8(5,3) on `y' = f(t, y)` from `t0` to `t_end` (either
/// direction), with the usual three-stage extension for dense output.
pub fn dop853<F>(mut f: F, t0: f64, y0: &[f64], t_end: f64, opts: &IntegrateOptions) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(DynamicsError::Invalid("tolerances must be positive".into()));
    }
    if !(t0.is_finite() && t_end.is_finite()) {
        return Err(DynamicsError::Invalid("non-finite time span".into()));
    }
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut stats = StepStats::default();
    let mut k = vec![vec![0.0; n]; STAGES_EXT];
    let mut ytmp = vec![0.0; n];
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut sol = Solution { ts: vec![t0], ys: vec![y.clone()], segments: Vec::new(), stats };
    let mut fy = vec![0.0; n];
    f(t, &y, &mut fy)?;
    stats.evaluations += 1;
    if t == t_end {
        sol.stats = stats;
        return Ok(sol);
    }

    let scale_of = |y: &[f64], z: &[f64], i: usize| opts.atol + opts.rtol * y[i].abs().max(z[i].abs());

    let mut h_abs = match (opts.fixed_step, opts.h0) {
        (Some(h), _) | (None, Some(h)) => h.abs(),
        (None, None) => {
            // Hairer's starting-step heuristic
            let d0 = rms((0..n).map(|i| y[i] / scale_of(&y, &y, i)), n);
            let d1 = rms((0..n).map(|i| fy[i] / scale_of(&y, &y, i)), n);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            let h0 = h0.min((t_end - t0).abs());
            for i in 0..n {
                ytmp[i] = y[i] + dir * h0 * fy[i];
            }
            let mut f1 = vec![0.0; n];
            f(t + dir * h0, &ytmp, &mut f1)?;
            stats.evaluations += 1;
            let d2 = rms((0..n).map(|i| (f1[i] - fy[i]) / scale_of(&y, &y, i)), n) / h0;
            let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(-ERR_EXPONENT)
            };
            (100.0 * h0).min(h1)
        }
    }
    .min(opts.h_max);

    let mut y_new = vec![0.0; n];
    let mut rejected = false;
    while dir * (t_end - t) > 0.0 {
        if stats.accepted >= opts.max_steps {
            return Err(DynamicsError::MaxSteps(opts.max_steps));
        }
        let min_step = 10.0 * (t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
        if h_abs < min_step {
            return Err(DynamicsError::StepUnderflow { t, h: h_abs });
        }
        let mut t_new = t + dir * h_abs;
        if dir * (t_new - t_end) > 0.0 {
            t_new = t_end;
        }
        let h = t_new - t;

        k[0].copy_from_slice(&fy);
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = 0.0;
                for (kk, a) in k[..s].iter().zip(&A[s][..s]) {
                    acc += a * kk[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            f(t + C[s] * h, &ytmp, &mut k[s])?;
        }
        for i in 0..n {
            let mut acc = 0.0;
            for (kk, b) in k[..STAGES].iter().zip(&A[STAGES][..STAGES]) {
                acc += b * kk[i];
            }
            y_new[i] = y[i] + h * acc;
        }
        f(t_new, &y_new, &mut k[STAGES])?;
        stats.evaluations += STAGES;
        if y_new.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::NonFinite(t_new));
        }

        let err_norm = if opts.fixed_step.is_some() {
            0.0
        } else {
            let (mut e5, mut e3) = (0.0, 0.0);
            for i in 0..n {
                let sc = scale_of(&y, &y_new, i);
                let (mut a5, mut a3) = (0.0, 0.0);
                for s in 0..=STAGES {
                    a5 += E5[s] * k[s][i];
                    a3 += E3[s] * k[s][i];
                }
                e5 += (a5 / sc).powi(2);
                e3 += (a3 / sc).powi(2);
            }
            if e5 == 0.0 && e3 == 0.0 {
                0.0
            } else {
                h.abs() * e5 / (((e5 + 0.01 * e3) * n as f64).sqrt())
            }
        };

        if err_norm >= 1.0 {
            h_abs *= MIN_FACTOR.max(SAFETY * err_norm.powf(ERR_EXPONENT));
            rejected = true;
            stats.rejected += 1;
            continue;
        }

        if opts.dense {
            for s in STAGES + 1..STAGES_EXT {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (kk, a) in k[..s].iter().zip(&A[s][..s]) {
                        acc += a * kk[i];
                    }
                    ytmp[i] = y[i] + h * acc;
                }
                f(t + C[s] * h, &ytmp, &mut k[s])?;
            }
            stats.evaluations += STAGES_EXT - STAGES - 1;
            let mut coef = vec![0.0; 7 * n];
            for i in 0..n {
                let dy = y_new[i] - y[i];
                coef[i] = dy;
                coef[n + i] = h * k[0][i] - dy;
                coef[2 * n + i] = 2.0 * dy - h * (k[STAGES][i] + k[0][i]);
                for (r, drow) in D.iter().enumerate() {
                    let mut acc = 0.0;
                    for (kk, d) in k.iter().zip(drow) {
                        acc += d * kk[i];
                    }
                    coef[(3 + r) * n + i] = h * acc;
                }
            }
            sol.segments.push(DenseSegment { t0: t, t1: t_new, y0: y.clone(), coef });
        }

        if opts.fixed_step.is_none() {
            let mut factor = if err_norm == 0.0 {
                MAX_FACTOR
            } else {
                MAX_FACTOR.min(SAFETY * err_norm.powf(ERR_EXPONENT))
            };
            if rejected {
                factor = factor.min(1.0);
            }
            h_abs = (h_abs * factor).min(opts.h_max);
        }
        rejected = false;
        stats.accepted += 1;
        t = t_new;
        std::mem::swap(&mut y, &mut y_new);
        fy.copy_from_slice(&k[STAGES]);
        sol.ts.push(t);
        sol.ys.push(y.clone());
    }
    sol.stats = stats;
    Ok(sol)
}

/// Integrated N-body motion: samples at the accepted steps (times
/// strictly increasing), their first integrals and the step interpolants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub masses: Vec<f64>,
    pub alpha: Alpha,
    pub index: ClusterIndex,
    pub samples: Vec<PhaseState>,
    pub ledger: Vec<Invariants>,
    /// Degree of the interpolant between samples; zero without dense output.
    pub order: usize,
    pub stats: StepStats,
    #[serde(skip)]
    segments: Vec<DenseSegment>,
}

/// Integrates `system` from `state0` to `t_end` (forward or backward).
pub fn integrate(system: &NBody, state0: &PhaseState, t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    if state0.len() != system.len() {
        return Err(DynamicsError::Invalid("state and system sizes differ".into()));
    }
    if !state0.is_finite() {
        return Err(DynamicsError::NonFinite(state0.t));
    }
    let sol = dop853(|t, y, dy| system.derivative(t, y, dy), state0.t, &state0.to_flat(), t_end, opts)?;
    let mut samples: Vec<PhaseState> = sol.ts.iter().zip(&sol.ys).map(|(t, y)| PhaseState::from_flat(*t, y)).collect();
    let mut segments = sol.segments;
    if t_end < state0.t {
        samples.reverse();
        segments.reverse();
    }
    let ledger = samples.iter().map(|s| system.invariants(s)).collect();
    Ok(Trajectory {
        masses: system.masses.clone(),
        alpha: system.alpha,
        index: system.index.clone(),
        samples,
        ledger,
        order: if opts.dense { 7 } else { 0 },
        stats: sol.stats,
        segments,
    })
}

impl Trajectory {
    pub fn t_min(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn first(&self) -> &PhaseState {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhaseState {
        &self.samples[self.samples.len() - 1]
    }

    pub fn has_dense_output(&self) -> bool {
        !self.segments.is_empty()
    }

    /// State at `t`: a stored sample when `t` hits one exactly, otherwise
    /// the step interpolant.
    pub fn state_at(&self, t: f64) -> Result<PhaseState> {
        let (lo, hi) = (self.t_min(), self.t_max());
        if !(lo <= t && t <= hi) {
            return Err(DynamicsError::OutOfRange { lo, hi, t });
        }
        let i = self.samples.partition_point(|s| s.t < t);
        if i < self.samples.len() && self.samples[i].t == t {
            return Ok(self.samples[i].clone());
        }
        if self.segments.is_empty() {
            return Err(DynamicsError::Invalid("trajectory has no dense output".into()));
        }
        // samples and segments share the ordering: segment i-1 spans samples i-1..i
        let seg = &self.segments[i - 1];
        debug_assert!(seg.contains(t));
        let mut y = vec![0.0; 4 * self.masses.len()];
        seg.eval(t, &mut y);
        Ok(PhaseState::from_flat(t, &y))
    }

    /// Largest drift over the run: relative energy, relative angular
    /// momentum and absolute linear momentum.
    pub fn max_drift(&self) -> (f64, f64, f64) {
        let e0 = self.ledger[0];
        let mut d = (0.0f64, 0.0f64, 0.0f64);
        for l in &self.ledger {
            d.0 = d.0.max((l.energy - e0.energy).abs() / e0.energy.abs().max(f64::MIN_POSITIVE));
            d.1 = d.1.max(
                (l.angular_momentum - e0.angular_momentum).abs() / e0.angular_momentum.abs().max(f64::MIN_POSITIVE),
            );
            d.2 = d.2.max(
                (l.linear_momentum[0] - e0.linear_momentum[0])
                    .abs()
                    .max((l.linear_momentum[1] - e0.linear_momentum[1]).abs()),
            );
        }
        d
    }
}
