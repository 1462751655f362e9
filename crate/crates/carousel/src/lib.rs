//! Carousel parameters and the leading-order carousel trajectories
//! `q_jk(t) = e^(tJ) a_0j + r_j e^((t w_j + th_j) J) a_jk`.

use std::f64::consts::PI;

use carousel_cc::CentralConfiguration;
use carousel_core::{apply_j, rotate, Alpha, ClusterConfig, ClusterIndex, CoreError, Vec2};
use serde::{Deserialize, Serialize};

mod scan;

pub use scan::{coupling_average, phase_scan, symmetry_order, PhaseScan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("infeasible plan: {0}")]
    Infeasible(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Frequencies and radii of a carousel: `w_j = 1 + p_j nu`,
/// `r_j = w_j^(-2/(alpha+1))`, `nu = eps^(-(alpha+1)/2) - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarouselPlan {
    pub alpha: Alpha,
    pub p_list: Vec<i64>,
    pub eps: f64,
    pub nu: f64,
    pub omega: Vec<f64>,
    pub radii: Vec<f64>,
    /// `(p, q)` with `nu = p/q` when the plan is periodic.
    pub rational: Option<(i64, i64)>,
    pub period: Option<f64>,
    pub phases: Vec<f64>,
}

fn check_p_list(p_list: &[i64]) -> Result<(), PlanError> {
    if p_list.is_empty() {
        return Err(PlanError::Invalid("need at least one cluster".into()));
    }
    if p_list.contains(&0) {
        return Err(PlanError::Invalid("p_j must be nonzero".into()));
    }
    Ok(())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Plan for a given small parameter `eps`.
pub fn plan_from_eps(p_list: &[i64], eps: f64, alpha: Alpha) -> Result<CarouselPlan, PlanError> {
    check_p_list(p_list)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(PlanError::Invalid(format!("eps must be positive, got {eps}")));
    }
    let a = alpha.value();
    let nu = eps.powf(-(a + 1.0) / 2.0) - 1.0;
    let omega: Vec<f64> = p_list.iter().map(|&p| 1.0 + p as f64 * nu).collect();
    if let Some((j, w)) = omega.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
        return Err(PlanError::Infeasible(format!(
            "1 + p_j nu = {w} <= 0 for cluster {} (p_j = {})",
            j + 1,
            p_list[j]
        )));
    }
    let radii = omega.iter().map(|w| w.powf(-2.0 / (a + 1.0))).collect();
    Ok(CarouselPlan {
        alpha,
        p_list: p_list.to_vec(),
        eps,
        nu,
        omega,
        radii,
        rational: None,
        period: None,
        phases: vec![0.0; p_list.len()],
    })
}

/// Periodic plan with `nu = p/q`: period `2 pi q`, the base configuration
/// winds `q` times and cluster `j` winds `q + p_j p` times.
pub fn plan_rational(p_list: &[i64], p: i64, q: i64, alpha: Alpha) -> Result<CarouselPlan, PlanError> {
    check_p_list(p_list)?;
    if p <= 0 || q <= 0 {
        return Err(PlanError::Invalid(format!("need p, q > 0, got p={p}, q={q}")));
    }
    if gcd(p, q) != 1 {
        return Err(PlanError::Invalid(format!("p={p} and q={q} are not coprime")));
    }
    for (j, &pj) in p_list.iter().enumerate() {
        if q + pj * p == 0 {
            return Err(PlanError::Infeasible(format!("q + p_j p = 0 for cluster {}", j + 1)));
        }
        if q + pj * p < 0 {
            return Err(PlanError::Infeasible(format!(
                "q + p_j p = {} < 0 for cluster {}: 1 + p_j nu must be positive",
                q + pj * p,
                j + 1
            )));
        }
    }
    let a = alpha.value();
    let nu = p as f64 / q as f64;
    let eps = (1.0 + nu).powf(-2.0 / (a + 1.0));
    let omega: Vec<f64> = p_list.iter().map(|&pj| (q + pj * p) as f64 / q as f64).collect();
    let radii = omega.iter().map(|w| w.powf(-2.0 / (a + 1.0))).collect();
    Ok(CarouselPlan {
        alpha,
        p_list: p_list.to_vec(),
        eps,
        nu,
        omega,
        radii,
        rational: Some((p, q)),
        period: Some(2.0 * PI * q as f64),
        phases: vec![0.0; p_list.len()],
    })
}

impl CarouselPlan {
    pub fn with_phases(mut self, phases: &[f64]) -> Result<CarouselPlan, PlanError> {
        if phases.len() != self.p_list.len() {
            return Err(PlanError::Invalid(format!(
                "{} phases for {} clusters",
                phases.len(),
                self.p_list.len()
            )));
        }
        self.phases = phases.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
        Ok(self)
    }

    pub fn n0(&self) -> usize {
        self.p_list.len()
    }

    /// `(r_j / eps, w_j / nu - p_j)` per cluster; they tend to
    /// `(p_j^(-2/(alpha+1)), 0)` as `eps -> 0`.
    pub fn first_order(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .zip(&self.omega)
            .zip(&self.p_list)
            .map(|((r, w), &p)| (r / self.eps, w / self.nu - p as f64))
            .collect()
    }

    /// Turns of the base configuration about the origin per period.
    pub fn base_winding(&self) -> Option<i64> {
        self.rational.map(|(_, q)| q)
    }

    /// Turns of cluster `j` (1-based) about its own center per period.
    pub fn cluster_winding(&self, j: usize) -> Option<i64> {
        self.rational.map(|(p, q)| q + self.p_list[j - 1] * p)
    }

    /// Angle `w t` of a frame turning `winding` times per period, reduced
    /// exactly through the integer winding when the plan is rational.
    fn angle(&self, rate: f64, winding: Option<i64>, t: f64) -> f64 {
        match (winding, self.rational) {
            (Some(w), Some((_, q))) => {
                // w t / (2 pi q) turns
                let turns = t / (2.0 * PI * q as f64);
                let whole = turns.floor();
                let frac = turns - whole;
                2.0 * PI * (w as f64 * frac).rem_euclid(1.0)
            }
            _ => rate * t,
        }
    }

    pub fn base_angle(&self, t: f64) -> f64 {
        self.angle(1.0, self.base_winding(), t)
    }

    pub fn cluster_angle(&self, j: usize, t: f64) -> f64 {
        self.angle(self.omega[j - 1], self.cluster_winding(j), t)
    }
}

/// The central configurations a carousel is built from: `a_0` with one
/// body per cluster and `a_1..a_n0` for the clusters with `k_j > 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarouselFamily {
    pub a0: CentralConfiguration,
    pub clusters: Vec<CentralConfiguration>,
    pub index: ClusterIndex,
}

const FAMILY_TOL: f64 = 1e-9;

impl CarouselFamily {
    /// `a0` must list the cabled bodies first, in the order of `clusters`.
    pub fn new(a0: CentralConfiguration, clusters: Vec<CentralConfiguration>) -> Result<CarouselFamily, PlanError> {
        let n = a0.len();
        let n0 = clusters.len();
        if n0 > n {
            return Err(PlanError::Invalid(format!("{n0} clusters for {n} bodies")));
        }
        let mut sizes = Vec::with_capacity(n);
        for (j, c) in clusters.iter().enumerate() {
            if c.len() < 2 {
                return Err(PlanError::Invalid(format!("cluster {} has fewer than two bodies", j + 1)));
            }
            if c.alpha != a0.alpha {
                return Err(PlanError::Invalid("all configurations must share alpha".into()));
            }
            let mj = c.total_mass();
            if (mj - a0.masses[j]).abs() > 1e-12 * mj {
                return Err(PlanError::Invalid(format!(
                    "cluster {} has mass {mj} but body {} of a0 has mass {}",
                    j + 1,
                    j + 1,
                    a0.masses[j]
                )));
            }
            let com = weighted(&c.positions, &c.masses);
            if com[0].hypot(com[1]) > FAMILY_TOL * (1.0 + diameter(&c.positions)) {
                return Err(PlanError::Invalid(format!("cluster {} is not centered", j + 1)));
            }
            sizes.push(c.len());
        }
        sizes.extend(std::iter::repeat(1).take(n - n0));
        for c in std::iter::once(&a0).chain(&clusters) {
            if c.residual > FAMILY_TOL {
                return Err(PlanError::Invalid(format!("configuration residual {:e} too large", c.residual)));
            }
        }
        let com = weighted(&a0.positions, &a0.masses);
        if com[0].hypot(com[1]) > FAMILY_TOL * (1.0 + diameter(&a0.positions)) {
            return Err(PlanError::Invalid("a0 is not centered".into()));
        }
        let index = ClusterIndex::new(sizes)?;
        Ok(CarouselFamily { a0, clusters, index })
    }

    /// Replaces the listed bodies of `a0` by clusters, moving them to the
    /// front in the given order. Returns the family and the permutation
    /// `new position -> old body index`.
    pub fn cabling(
        a0: &CentralConfiguration,
        cabled: Vec<(usize, CentralConfiguration)>,
    ) -> Result<(CarouselFamily, Vec<usize>), PlanError> {
        let n = a0.len();
        let mut order: Vec<usize> = cabled.iter().map(|(b, _)| *b).collect();
        if order.iter().any(|&b| b >= n) {
            return Err(PlanError::Invalid("cabled body index out of range".into()));
        }
        let mut seen = order.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != order.len() {
            return Err(PlanError::Invalid("a body is cabled twice".into()));
        }
        order.extend((0..n).filter(|b| !seen.contains(b)));
        let mut re = a0.clone();
        re.positions = order.iter().map(|&b| a0.positions[b]).collect();
        re.masses = order.iter().map(|&b| a0.masses[b]).collect();
        let clusters = cabled.into_iter().map(|(_, c)| c).collect();
        Ok((CarouselFamily::new(re, clusters)?, order))
    }

    pub fn alpha(&self) -> Alpha {
        self.a0.alpha
    }

    pub fn n(&self) -> usize {
        self.a0.len()
    }

    pub fn n0(&self) -> usize {
        self.clusters.len()
    }

    /// Flat masses `m_jk` in cluster order.
    pub fn masses(&self) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.index.total());
        for j in 0..self.n() {
            match self.clusters.get(j) {
                Some(c) => m.extend_from_slice(&c.masses),
                None => m.push(self.a0.masses[j]),
            }
        }
        m
    }

    fn check_plan(&self, plan: &CarouselPlan) {
        assert_eq!(plan.n0(), self.n0(), "plan and family disagree on the number of clusters");
    }
}

fn weighted(q: &[Vec2], m: &[f64]) -> Vec2 {
    let mt: f64 = m.iter().sum();
    let mut s = [0.0, 0.0];
    for (qi, mi) in q.iter().zip(m) {
        s[0] += mi * qi[0] / mt;
        s[1] += mi * qi[1] / mt;
    }
    s
}

fn diameter(q: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for a in q {
        for b in q {
            d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    d
}

/// Leading-order positions at time `t`.
pub fn assemble_trajectory(family: &CarouselFamily, plan: &CarouselPlan, t: f64) -> ClusterConfig {
    family.check_plan(plan);
    let base = plan.base_angle(t);
    let mut q = Vec::with_capacity(family.index.total());
    for j in 0..family.n() {
        let c0 = rotate(base, family.a0.positions[j]);
        match family.clusters.get(j) {
            Some(cl) => {
                let th = plan.cluster_angle(j + 1, t) + plan.phases[j];
                let r = plan.radii[j];
                for a in &cl.positions {
                    let v = rotate(th, *a);
                    q.push([c0[0] + r * v[0], c0[1] + r * v[1]]);
                }
            }
            None => q.push(c0),
        }
    }
    ClusterConfig::new(family.index.clone(), q, family.masses()).expect("family layout is consistent")
}

/// Time derivative of [`assemble_trajectory`].
pub fn assemble_velocity(family: &CarouselFamily, plan: &CarouselPlan, t: f64) -> Vec<Vec2> {
    family.check_plan(plan);
    let base = plan.base_angle(t);
    let mut v = Vec::with_capacity(family.index.total());
    for j in 0..family.n() {
        let c0 = apply_j(rotate(base, family.a0.positions[j]));
        match family.clusters.get(j) {
            Some(cl) => {
                let th = plan.cluster_angle(j + 1, t) + plan.phases[j];
                let rw = plan.radii[j] * plan.omega[j];
                for a in &cl.positions {
                    let u = apply_j(rotate(th, *a));
                    v.push([c0[0] + rw * u[0], c0[1] + rw * u[1]]);
                }
            }
            None => v.push(c0),
        }
    }
    v
}
