//! Fourier-Galerkin refinement of carousel orbits.
//!
//! Unknowns are the scaled coordinates `u = (u_0, u_1, .., u_n0)` as
//! functions of the fast time `s = nu t`:
//! `q_jk(t) = e^(tJ) u_0j(s) + r_j e^(w_j t J) u_jk(s)`.
//! The discrete action is the physical one, `int K + U ds`, sampled on
//! `4L + 1` equispaced nodes.

use carousel_core::{rotate, ClusterIndex, Complex64};
use carousel_plan::{CarouselFamily, CarouselPlan, PlanError};
use serde::{Deserialize, Serialize};

mod galerkin;
mod inertial;
mod newton;

pub use galerkin::{action_gradient, discrete_action, projected_gradient_norm};
pub use inertial::{inertial_acceleration, nbody_residual, to_inertial};
pub use newton::{refine_orbit, RefineOptions, RefineReport, RefinedOrbit};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RefineError {
    #[error("bodies {i} and {j} collide at collocation node s = {s}")]
    Collision { i: usize, j: usize, s: f64 },
    #[error("Newton iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("bordered Newton system is rank deficient ({0})")]
    RankDeficient(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

pub type Result<T> = std::result::Result<T, RefineError>;

/// Truncated Fourier series `u(s) = sum_{|l| <= L} c_l e^(i l s)` of a real
/// path, stored for `l >= 0` only (`c_-l = conj(c_l)`).
///
/// Coordinates: cluster centers `u_0` first (2 per cluster), then the
/// members of each cluster with `k_j > 1` (2 per member).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierPath {
    pub l: usize,
    pub index: ClusterIndex,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl FourierPath {
    pub fn zeros(index: ClusterIndex, l: usize) -> FourierPath {
        let d = full_dim(&index);
        FourierPath { l, index, coeffs: vec![vec![Complex64::new(0.0, 0.0); d]; l + 1] }
    }

    /// Constant path at the leading-order carousel: `u_0 = a_0` and
    /// `u_j = e^(th_j J) a_j`.
    pub fn lift(family: &CarouselFamily, plan: &CarouselPlan, l: usize) -> Result<FourierPath> {
        if plan.n0() != family.n0() {
            return Err(RefineError::Invalid("plan and family disagree on the number of clusters".into()));
        }
        let mut path = FourierPath::zeros(family.index.clone(), l);
        let c = &mut path.coeffs[0];
        for (j, q) in family.a0.positions.iter().enumerate() {
            c[2 * j] = q[0].into();
            c[2 * j + 1] = q[1].into();
        }
        let mut off = 2 * family.n();
        for (j, cl) in family.clusters.iter().enumerate() {
            for a in &cl.positions {
                let v = rotate(plan.phases[j], *a);
                c[off] = v[0].into();
                c[off + 1] = v[1].into();
                off += 2;
            }
        }
        Ok(path)
    }

    pub fn dim(&self) -> usize {
        full_dim(&self.index)
    }

    /// Same path with `l` modes (padding with zeros or truncating).
    pub fn with_truncation(&self, l: usize) -> FourierPath {
        let d = self.dim();
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(l + 1, vec![Complex64::new(0.0, 0.0); d]);
        FourierPath { l, index: self.index.clone(), coeffs }
    }

    /// `(u, u', u'')` at `s`.
    pub fn eval(&self, s: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut u: Vec<f64> = self.coeffs[0].iter().map(|c| c.re).collect();
        let mut du = vec![0.0; d];
        let mut ddu = vec![0.0; d];
        for (l, c) in self.coeffs.iter().enumerate().skip(1) {
            let lf = l as f64;
            let e = Complex64::from_polar(1.0, lf * s);
            for i in 0..d {
                let z = c[i] * e;
                u[i] += 2.0 * z.re;
                du[i] -= 2.0 * lf * z.im;
                ddu[i] -= 2.0 * lf * lf * z.re;
            }
        }
        (u, du, ddu)
    }

    /// `|c_L|`, the size of the last retained mode.
    pub fn tail_norm(&self) -> f64 {
        self.coeffs[self.l].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Share of the oscillating energy carried by modes above `L/2`.
    pub fn tail_fraction(&self) -> f64 {
        let energy = |r: std::ops::RangeInclusive<usize>| -> f64 {
            r.map(|l| self.coeffs[l].iter().map(|c| c.norm_sqr()).sum::<f64>()).sum()
        };
        let total = energy(1..=self.l);
        if total == 0.0 {
            0.0
        } else {
            energy(self.l / 2 + 1..=self.l) / total
        }
    }

    /// `sqrt(sum_l |c_l|^2)` over `l >= 0`, each mode counted once.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &FourierPath) -> f64 {
        let l = self.l.max(other.l);
        let (a, b) = (self.with_truncation(l), other.with_truncation(l));
        a.coeffs.iter().flatten().zip(b.coeffs.iter().flatten()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }
}

pub(crate) fn full_dim(index: &ClusterIndex) -> usize {
    2 * index.n() + (1..=index.n0()).map(|j| 2 * index.size(j)).sum::<usize>()
}
