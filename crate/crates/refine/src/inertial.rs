use std::f64::consts::PI;

use carousel_core::{rotate, Vec2};
use carousel_dynamics::{rhs, PhaseState};
use carousel_plan::{CarouselFamily, CarouselPlan};

use crate::{FourierPath, RefineError, Result};

/// Fast time `s = nu t` reduced to `[0, 2 pi)`, exactly for rational plans.
fn fast_time(plan: &CarouselPlan, t: f64) -> f64 {
    match plan.rational {
        Some((p, q)) => {
            let turns = t / (2.0 * PI * q as f64);
            let frac = turns - turns.floor();
            2.0 * PI * (p as f64 * frac).rem_euclid(1.0)
        }
        None => (plan.nu * t).rem_euclid(2.0 * PI),
    }
}

fn check(path: &FourierPath, plan: &CarouselPlan) -> Result<()> {
    if path.index.n0() != plan.n0() {
        return Err(RefineError::Invalid("path and plan disagree on the number of clusters".into()));
    }
    Ok(())
}

fn at(u: &[f64], i: usize) -> Vec2 {
    [u[i], u[i + 1]]
}

fn j(v: Vec2) -> Vec2 {
    [-v[1], v[0]]
}

fn combine(terms: &[(f64, Vec2)]) -> Vec2 {
    terms.iter().fold([0.0, 0.0], |acc, (c, v)| [acc[0] + c * v[0], acc[1] + c * v[1]])
}

/// Positions, velocities and accelerations of all bodies at time `t`.
fn kinematics(path: &FourierPath, plan: &CarouselPlan, t: f64) -> Result<(Vec<Vec2>, Vec<Vec2>, Vec<Vec2>)> {
    check(path, plan)?;
    let index = &path.index;
    let nu = plan.nu;
    let (u, du, ddu) = path.eval(fast_time(plan, t));
    let th0 = plan.base_angle(t);
    let total = index.total();
    let (mut q, mut v, mut a) = (Vec::with_capacity(total), Vec::with_capacity(total), Vec::with_capacity(total));
    let mut off = 2 * index.n();
    for jj in 0..index.n() {
        let (c, dc, ddc) = (at(&u, 2 * jj), at(&du, 2 * jj), at(&ddu, 2 * jj));
        let qc = rotate(th0, c);
        let vc = rotate(th0, combine(&[(1.0, j(c)), (nu, dc)]));
        let ac = rotate(th0, combine(&[(nu * nu, ddc), (2.0 * nu, j(dc)), (-1.0, c)]));
        if jj < index.n0() {
            let th = plan.cluster_angle(jj + 1, t);
            let (r, w) = (plan.radii[jj], plan.omega[jj]);
            for _ in 0..index.size(jj + 1) {
                let (m, dm, ddm) = (at(&u, off), at(&du, off), at(&ddu, off));
                let qm = rotate(th, m);
                let vm = rotate(th, combine(&[(w, j(m)), (nu, dm)]));
                let am = rotate(th, combine(&[(nu * nu, ddm), (2.0 * nu * w, j(dm)), (-w * w, m)]));
                q.push([qc[0] + r * qm[0], qc[1] + r * qm[1]]);
                v.push([vc[0] + r * vm[0], vc[1] + r * vm[1]]);
                a.push([ac[0] + r * am[0], ac[1] + r * am[1]]);
                off += 2;
            }
        } else {
            q.push(qc);
            v.push(vc);
            a.push(ac);
        }
    }
    Ok((q, v, a))
}

/// Inertial positions and velocities of the orbit described by `path`.
pub fn to_inertial(path: &FourierPath, plan: &CarouselPlan, t: f64) -> Result<PhaseState> {
    let (q, v, _) = kinematics(path, plan, t)?;
    Ok(PhaseState { t, q, v })
}

/// Second time derivative of the inertial positions.
pub fn inertial_acceleration(path: &FourierPath, plan: &CarouselPlan, t: f64) -> Result<Vec<Vec2>> {
    Ok(kinematics(path, plan, t)?.2)
}

/// `max_i m_i |q_i'' - F_i / m_i|` at time `t`.
pub fn nbody_residual(path: &FourierPath, plan: &CarouselPlan, family: &CarouselFamily, t: f64) -> Result<f64> {
    let (q, _, a) = kinematics(path, plan, t)?;
    let masses = family.masses();
    let f = rhs(&q, &masses, family.alpha()).map_err(|e| RefineError::Invalid(e.to_string()))?;
    Ok(a.iter()
        .zip(&f)
        .zip(&masses)
        .map(|((a, f), m)| m * (a[0] - f[0]).hypot(a[1] - f[1]))
        .fold(0.0, f64::max))
}
