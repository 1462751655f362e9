use carousel_plan::{CarouselFamily, CarouselPlan};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::galerkin::Galerkin;
use crate::{FourierPath, RefineError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Starting truncation.
    pub l: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest truncation the tail check may double up to.
    pub max_l: usize,
    /// Largest acceptable `|c_L|`.
    pub tail_tol: f64,
    /// Extra Newton steps after `tol` is met, kept while they at least
    /// halve the residual.
    pub polish: usize,
    /// Skip the condition estimate.
    pub skip_condition: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { l: 32, tol: 1e-10, max_iter: 30, max_l: 256, tail_tol: 1e-10, polish: 2, skip_condition: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    /// Residual norm before every Newton step and after the last, over
    /// all truncations tried, polishing steps included.
    pub residual_history: Vec<f64>,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// Newton steps needed to reach `tol`, polishing excluded.
    pub iterations: usize,
    pub l: usize,
    pub tail: f64,
    /// Lagrange multipliers of the rotation and time-shift directions;
    /// they vanish on a genuine critical point.
    pub multipliers: [f64; 2],
    /// Component of the residual along the unit rotation generator.
    pub symmetry_residual: f64,
    /// Values of the two phase conditions at the solution.
    pub phase_constraints: [f64; 2],
    /// Estimated 2-norm condition number of the bordered Jacobian.
    pub condition: Option<f64>,
    /// `|x - x_init|` in reduced coordinates.
    pub displacement: f64,
    pub action: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedOrbit {
    pub family: CarouselFamily,
    pub plan: CarouselPlan,
    pub path: FourierPath,
    pub report: RefineReport,
}

/// Bordered system for a fixed truncation.
struct Bordered<'a> {
    g: &'a Galerkin,
    x0: DVector<f64>,
    /// Unit normals of the two phase conditions.
    lock_h: DVector<f64>,
    lock_1: DVector<f64>,
    gh: DMatrix<f64>,
    gt: DMatrix<f64>,
}

impl<'a> Bordered<'a> {
    fn new(g: &'a Galerkin, x0: DVector<f64>) -> Result<Bordered<'a>> {
        let n = g.len();
        let mut gh = DMatrix::zeros(n, n);
        let mut gt = DMatrix::zeros(n, n);
        for c in 0..n {
            let e = DVector::from_fn(n, |i, _| if i == c { 1.0 } else { 0.0 });
            gh.set_column(c, &g.rotation_generator(&e, &g.jr));
            gt.set_column(c, &g.shift_generator(&e));
        }
        let unit = |v: DVector<f64>, what: &str| -> Result<DVector<f64>> {
            let nv = v.norm();
            if nv == 0.0 {
                return Err(RefineError::RankDeficient(format!("{what} direction vanishes at the initial path")));
            }
            Ok(v / nv)
        };
        let lock_h = unit(&gh * &x0, "rotation")?;
        let mut l1 = DVector::zeros(n);
        l1.rows_mut(0, g.d).copy_from(&(&g.jr1 * x0.rows(0, g.d)));
        let lock_1 = unit(l1, "cluster rotation")?;
        Ok(Bordered { g, x0, lock_h, lock_1, gh, gt })
    }

    fn residual(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.g.len();
        let x = z.rows(0, n).clone_owned();
        let (m1, m2) = (z[n], z[n + 1]);
        let mut r = DVector::zeros(n + 2);
        let f = self.g.residual(&x)? + &self.gh * &x * m1 + &self.gt * &x * m2;
        r.rows_mut(0, n).copy_from(&f);
        let dx = &x - &self.x0;
        r[n] = self.lock_h.dot(&dx);
        r[n + 1] = self.lock_1.dot(&dx);
        Ok(r)
    }

    fn jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = self.g.len();
        let x = z.rows(0, n).clone_owned();
        let mut a = DMatrix::zeros(n + 2, n + 2);
        let j = self.g.jacobian(&x)? + &self.gh * z[n] + &self.gt * z[n + 1];
        a.view_mut((0, 0), (n, n)).copy_from(&j);
        a.view_mut((0, n), (n, 1)).copy_from(&(&self.gh * &x));
        a.view_mut((0, n + 1), (n, 1)).copy_from(&(&self.gt * &x));
        a.view_mut((n, 0), (1, n)).copy_from(&self.lock_h.transpose());
        a.view_mut((n + 1, 0), (1, n)).copy_from(&self.lock_1.transpose());
        Ok(a)
    }
}

/// `sigma_max / sigma_min` by power iteration on `A^T A` and inverse
/// iteration through LU factors of `A` and `A^T`.
fn condition_estimate(a: &DMatrix<f64>) -> Option<f64> {
    let n = a.nrows();
    let start = DVector::from_fn(n, |i, _| 1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0);
    let mut v = start.normalize();
    let mut smax = 0.0;
    for _ in 0..60 {
        let w = a.tr_mul(&(a * &v));
        smax = w.norm().sqrt();
        if smax == 0.0 {
            return None;
        }
        v = w.normalize();
    }
    let lu = a.clone().lu();
    let lut = a.transpose().lu();
    let mut v = start.normalize();
    let mut inv = 0.0;
    for _ in 0..60 {
        let y = lut.solve(&v)?;
        let w = lu.solve(&y)?;
        inv = w.norm().sqrt();
        if !inv.is_finite() || inv == 0.0 {
            return None;
        }
        v = w.normalize();
    }
    Some(smax * inv)
}

/// One Armijo-damped Newton step; `None` when no step length reduces the
/// residual.
#[allow(clippy::type_complexity)]
fn newton_step(
    sys: &Bordered,
    z: &DVector<f64>,
    r: &DVector<f64>,
    rn: f64,
    l: usize,
) -> Result<Option<(DVector<f64>, DVector<f64>, f64)>> {
    let step = sys
        .jacobian(z)?
        .lu()
        .solve(&(-r))
        .ok_or_else(|| RefineError::RankDeficient(format!("singular bordered Jacobian at L = {l}")))?;
    let mut lambda = 1.0;
    loop {
        let trial = z + &step * lambda;
        match sys.residual(&trial) {
            Ok(rt) if rt.norm() <= (1.0 - 1e-4 * lambda) * rn => return Ok(Some((trial, rt, lambda))),
            _ if lambda < 1.0 / 1024.0 => return Ok(None),
            _ => lambda *= 0.5,
        }
    }
}

fn pad(x: &DVector<f64>, d: usize, modes: usize) -> DVector<f64> {
    let mut y = DVector::zeros(modes * d);
    let k = x.len().min(y.len());
    y.rows_mut(0, k).copy_from(&x.rows(0, k));
    y
}

/// Newton iteration on the projected, preconditioned action gradient,
/// bordered by the rotation and time-shift symmetries. The truncation is
/// doubled while the last mode exceeds `tail_tol`.
pub fn refine_orbit(
    init: &FourierPath,
    plan: &CarouselPlan,
    family: &CarouselFamily,
    opts: &RefineOptions,
) -> Result<RefinedOrbit> {
    if init.index != family.index {
        return Err(RefineError::Invalid("initial path and family have different cluster layouts".into()));
    }
    if opts.l == 0 || opts.max_l < opts.l {
        return Err(RefineError::Invalid("need 0 < l <= max_l".into()));
    }
    let mut l = opts.l.max(init.l.min(opts.max_l));
    let mut g = Galerkin::new(family, plan, l)?;
    let x_init = g.to_x(init);
    let mut z = x_init.clone().push(0.0).push(0.0);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut warnings = Vec::new();
    let initial_residual = g.residual(&x_init)?.norm();

    loop {
        let n = g.len();
        let sys = Bordered::new(&g, pad(&x_init, g.d, g.modes()))?;
        let mut r = sys.residual(&z)?;
        let mut rn = r.norm();
        history.push(rn);
        let mut local = 0;
        while rn > opts.tol {
            if local >= opts.max_iter {
                return Err(RefineError::NonConvergence { iterations, residual: rn });
            }
            let Some((zn, rt, lambda)) = newton_step(&sys, &z, &r, rn, l)? else {
                return Err(RefineError::NonConvergence { iterations, residual: rn });
            };
            if lambda < 1.0 {
                warnings.push(format!("damped step (lambda = {lambda}) at L = {l}"));
            }
            z = zn;
            r = rt;
            rn = r.norm();
            history.push(rn);
            iterations += 1;
            local += 1;
        }
        for _ in 0..opts.polish {
            match newton_step(&sys, &z, &r, rn, l).ok().flatten() {
                Some((zn, rt, lambda)) if lambda == 1.0 && rt.norm() <= 0.5 * rn => {
                    z = zn;
                    r = rt;
                    rn = r.norm();
                    history.push(rn);
                }
                _ => break,
            }
        }
        let x = z.rows(0, n).clone_owned();
        let tail = g.tail(&x);
        if tail > opts.tail_tol && 2 * l <= opts.max_l {
            l *= 2;
            g = Galerkin::new(family, plan, l)?;
            z = pad(&x, g.d, g.modes()).push(z[n]).push(z[n + 1]);
            continue;
        }
        if tail > opts.tail_tol {
            warnings.push(format!("tail {tail:e} above {:e} at the largest truncation L = {l}", opts.tail_tol));
        }
        let condition = if opts.skip_condition { None } else { condition_estimate(&sys.jacobian(&z)?) };
        let path = g.from_x(&x, &family.index);
        if path.tail_fraction() > 0.1 {
            warnings.push(format!("modes above L/2 carry {:.0}% of the energy", 100.0 * path.tail_fraction()));
        }
        let gh = &sys.gh * &x;
        let symmetry_residual = g.residual(&x)?.dot(&gh) / gh.norm();
        let xi = pad(&x_init, g.d, g.modes());
        let dx = &x - &xi;
        let report = RefineReport {
            residual_history: history,
            initial_residual,
            final_residual: rn,
            iterations,
            l,
            tail,
            multipliers: [z[n], z[n + 1]],
            symmetry_residual,
            phase_constraints: [sys.lock_h.dot(&dx), sys.lock_1.dot(&dx)],
            condition,
            displacement: dx.norm(),
            action: g.action(&x)?,
            warnings,
        };
        return Ok(RefinedOrbit {
            family: family.clone(),
            plan: plan.clone(),
            path,
            report,
        });
    }
}
