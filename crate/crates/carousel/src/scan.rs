//! Leading-order phase function: the average over the fast angle of the
//! coupling between clusters.

use std::f64::consts::PI;

use carousel_cc::CentralConfiguration;
use carousel_core::{rotate, Vec2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{CarouselFamily, CarouselPlan};

/// Order of the rotational symmetry of a configuration, masses included.
pub fn symmetry_order(cc: &CentralConfiguration) -> usize {
    let k = cc.len();
    let diam = cc
        .positions
        .iter()
        .flat_map(|a| cc.positions.iter().map(move |b| (a[0] - b[0]).hypot(a[1] - b[1])))
        .fold(0.0, f64::max);
    let tol = 1e-9 * diam.max(1e-300);
    'order: for s in (2..=k).rev() {
        let th = 2.0 * PI / s as f64;
        for (q, m) in cc.positions.iter().zip(&cc.masses) {
            let r = rotate(th, *q);
            let hit = cc.positions.iter().zip(&cc.masses).any(|(p, mp)| {
                (p[0] - r[0]).hypot(p[1] - r[1]) < tol && (mp - m).abs() <= 1e-12 * m
            });
            if !hit {
                continue 'order;
            }
        }
        return s;
    }
    1
}

/// Coupling between clusters on the leading-order path, in the frame of
/// the base configuration, at fast time `s`: the cross-cluster potential
/// minus its point-mass value.
fn coupling(family: &CarouselFamily, plan: &CarouselPlan, phases: &[f64], s: f64, buf: &mut Vec<(usize, Vec2, f64)>) -> f64 {
    let alpha = family.alpha();
    buf.clear();
    for j in 0..family.n() {
        let c = family.a0.positions[j];
        match family.clusters.get(j) {
            Some(cl) => {
                let th = plan.p_list[j] as f64 * s + phases[j];
                let r = plan.radii[j];
                for (a, m) in cl.positions.iter().zip(&cl.masses) {
                    let v = rotate(th, *a);
                    buf.push((j, [c[0] + r * v[0], c[1] + r * v[1]], *m));
                }
            }
            None => buf.push((j, c, family.a0.masses[j])),
        }
    }
    let mut h = 0.0;
    for i in 0..buf.len() {
        for k in i + 1..buf.len() {
            let (ji, qi, mi) = buf[i];
            let (jk, qk, mk) = buf[k];
            if ji != jk {
                h += mi * mk * alpha.phi((qi[0] - qk[0]).hypot(qi[1] - qk[1]));
            }
        }
    }
    let a0 = &family.a0;
    for i in 0..a0.len() {
        for k in i + 1..a0.len() {
            let d = (a0.positions[i][0] - a0.positions[k][0]).hypot(a0.positions[i][1] - a0.positions[k][1]);
            h -= a0.masses[i] * a0.masses[k] * alpha.phi(d);
        }
    }
    h
}

/// Average of the coupling over `s` in `[0, 2 pi)` (trapezoidal rule,
/// spectrally accurate for the periodic integrand). Shifting `s` shows it
/// is invariant under `th_j -> th_j + p_j c`.
pub fn coupling_average(family: &CarouselFamily, plan: &CarouselPlan, phases: &[f64]) -> f64 {
    let pmax = plan.p_list.iter().map(|p| p.unsigned_abs()).max().unwrap_or(1) as usize;
    let nodes = 128 * pmax;
    let mut buf = Vec::new();
    let sum: f64 = (0..nodes)
        .map(|i| coupling(family, plan, phases, 2.0 * PI * i as f64 / nodes as f64, &mut buf))
        .sum();
    sum / nodes as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    /// Rotational symmetry order of each cluster; phases range over
    /// `[0, 2 pi / sym_j)`.
    pub symmetry: Vec<usize>,
    pub grid: usize,
    pub points: Vec<(Vec<f64>, f64)>,
    /// Indices into `points` of local minima and maxima on the grid.
    pub minima: Vec<usize>,
    pub maxima: Vec<usize>,
    /// The averaged coupling is constant to rounding, so every phase is
    /// critical at this order.
    pub degenerate: bool,
    pub spread: f64,
}

impl PhaseScan {
    /// Critical phase candidates: all extrema, or every grid point when
    /// the phase function is flat.
    pub fn critical(&self) -> Vec<&[f64]> {
        if self.degenerate {
            self.points.iter().map(|(p, _)| p.as_slice()).collect()
        } else {
            self.minima.iter().chain(&self.maxima).map(|&i| self.points[i].0.as_slice()).collect()
        }
    }
}

/// Evaluates the averaged coupling on a `grid^n0` periodic grid of phases
/// (in parallel on the current rayon pool) and reports the local extrema.
pub fn phase_scan(family: &CarouselFamily, plan: &CarouselPlan, grid: usize) -> PhaseScan {
    assert!(grid >= 3, "grid needs at least three points per axis");
    let n0 = family.n0();
    let symmetry: Vec<usize> = family.clusters.iter().map(symmetry_order).collect();
    let total = grid.pow(n0 as u32);
    let points: Vec<(Vec<f64>, f64)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rem = idx;
            let phases: Vec<f64> = (0..n0)
                .map(|j| {
                    let i = rem % grid;
                    rem /= grid;
                    2.0 * PI / symmetry[j] as f64 * i as f64 / grid as f64
                })
                .collect();
            let v = coupling_average(family, plan, &phases);
            (phases, v)
        })
        .collect();
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let degenerate = spread <= 1e-12 * hi.abs().max(lo.abs()).max(1e-300) || n0 == 0;
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    if !degenerate {
        for idx in 0..total {
            let v = points[idx].1;
            let (mut is_min, mut is_max) = (true, true);
            let mut stride = 1;
            for _ in 0..n0 {
                let i = (idx / stride) % grid;
                for ni in [(i + 1) % grid, (i + grid - 1) % grid] {
                    let nb = idx - i * stride + ni * stride;
                    let w = points[nb].1;
                    is_min &= v < w;
                    is_max &= v > w;
                }
                stride *= grid;
            }
            if is_min {
                minima.push(idx);
            }
            if is_max {
                maxima.push(idx);
            }
        }
    }
    PhaseScan { symmetry, grid, points, minima, maxima, degenerate, spread }
}
