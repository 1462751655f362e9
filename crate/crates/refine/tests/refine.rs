use std::f64::consts::PI;

use carousel_cc::{binary_config, lagrange_config};
use carousel_core::Alpha;
use carousel_dynamics::{carousel_state, integrate, state_defect, winding_numbers, IntegrateOptions, NBody};
use carousel_plan::{plan_from_eps, plan_rational, CarouselFamily, CarouselPlan};
use carousel_refine::*;

fn alpha(s: &str) -> Alpha {
    s.parse().unwrap()
}

/// Lagrange triangle (1, 2, 3) with the unit mass replaced by a binary.
fn family(cabled: &[usize]) -> CarouselFamily {
    let a = alpha("3/2");
    let a0 = lagrange_config(1.0, 2.0, 3.0, a).unwrap();
    let m = [1.0, 2.0, 3.0];
    let cl = cabled.iter().map(|&b| (b, binary_config(0.5 * m[b], 0.5 * m[b], a).unwrap())).collect();
    CarouselFamily::cabling(&a0, cl).unwrap().0
}

fn refined(p: i64, phase: f64) -> (CarouselFamily, CarouselPlan, RefinedOrbit) {
    let fam = family(&[0]);
    let plan = plan_rational(&[1], p, 1, fam.alpha()).unwrap().with_phases(&[phase]).unwrap();
    let init = FourierPath::lift(&fam, &plan, 12).unwrap();
    let opts = RefineOptions { l: 12, ..RefineOptions::default() };
    let orbit = refine_orbit(&init, &plan, &fam, &opts).unwrap();
    (fam, plan, orbit)
}

#[test]
fn lift_matches_leading_order() {
    let fam = family(&[0]);
    let plan = plan_rational(&[1], 40, 1, fam.alpha()).unwrap().with_phases(&[0.7]).unwrap();
    let path = FourierPath::lift(&fam, &plan, 4).unwrap();
    for &t in &[0.0, 0.3, 1.7, 4.0, 2.0 * PI] {
        let a = to_inertial(&path, &plan, t).unwrap();
        let b = carousel_state(&fam, &plan, t);
        assert!(state_defect(&a, &b, &fam.masses()) < 1e-12, "t = {t}");
    }
}

#[test]
fn paths_are_periodic() {
    let fam = family(&[0]);
    let plan = plan_rational(&[1], 41, 2, fam.alpha()).unwrap();
    let mut path = FourierPath::lift(&fam, &plan, 3).unwrap();
    path.coeffs[2][1] = carousel_core::Complex64::new(0.01, -0.02);
    path.coeffs[3][7] = carousel_core::Complex64::new(-0.003, 0.001);
    let period = plan.period.unwrap();
    for &t in &[0.0, 0.9, 3.3] {
        let a = to_inertial(&path, &plan, t).unwrap();
        let b = to_inertial(&path, &plan, t + period).unwrap();
        assert!(state_defect(&a, &b, &fam.masses()) < 1e-12);
    }
}

#[test]
fn initial_residual_shrinks_with_eps() {
    let fam = family(&[0]);
    let res: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&e| {
            let plan = plan_from_eps(&[1], e, fam.alpha()).unwrap();
            projected_gradient_norm(&FourierPath::lift(&fam, &plan, 8).unwrap(), &plan, &fam).unwrap()
        })
        .collect();
    let slope = (res[0] / res[2]).ln() / 4f64.ln();
    assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
    assert!(slope > 0.9, "slope {slope}, {res:?}");
}

#[test]
fn refinement_converges() {
    let (fam, plan, orbit) = refined(315, 0.0);
    let rep = &orbit.report;
    assert!(rep.final_residual < 1e-10, "{rep:?}");
    assert!(rep.tail <= 1e-10, "tail {}", rep.tail);
    assert!(rep.multipliers.iter().all(|m| m.abs() < 1e-8), "{:?}", rep.multipliers);
    assert!(rep.displacement < 0.1 * plan.eps.sqrt(), "displacement {}", rep.displacement);
    assert!(projected_gradient_norm(&orbit.path, &plan, &fam).unwrap() < 1e-10);
    let g = action_gradient(&orbit.path, &plan, &fam).unwrap();
    assert!(g.norm() < 1e-10);
    for i in 0..40 {
        let t = 2.0 * PI * i as f64 / 40.0;
        let r = nbody_residual(&orbit.path, &plan, &fam, t).unwrap();
        assert!(r < 1e-7, "N-body residual {r:e} at t = {t}");
    }
}

#[test]
fn refined_orbit_survives_integration() {
    let (fam, plan, orbit) = refined(315, 0.0);
    let s0 = to_inertial(&orbit.path, &plan, 0.0).unwrap();
    let sys = NBody::with_index(fam.masses(), fam.alpha(), fam.index.clone(), &s0.q).unwrap();
    let period = plan.period.unwrap();
    let traj = integrate(&sys, &s0, period, &IntegrateOptions::tol(1e-14, 1e-16)).unwrap();
    let d = state_defect(traj.last(), &s0, &fam.masses());
    assert!(d < 1e-8, "periodicity defect {d:e}");
    let w = winding_numbers(&traj, &plan).unwrap();
    assert_eq!(w.base, vec![1, 1, 1]);
    assert_eq!(w.clusters, vec![316]);
}

#[test]
fn phase_shift_gives_the_same_orbit() {
    let (fam, _, a) = refined(315, 0.0);
    let (_, _, b) = refined(315, 0.5 * PI);
    assert!((a.report.action - b.report.action).abs() < 1e-9 * a.report.action.abs());
    // per-body magnitude spectra are invariant under rotations and time shifts
    let spectrum = |p: &FourierPath| -> Vec<f64> {
        p.coeffs.iter().flat_map(|c| c.chunks(2).map(|z| (z[0].norm_sqr() + z[1].norm_sqr()).sqrt())).collect()
    };
    let (sa, sb) = (spectrum(&a.path.with_truncation(32)), spectrum(&b.path.with_truncation(32)));
    let diff = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-9, "spectra differ by {diff:e}");
    let inv = |o: &RefinedOrbit| {
        let s = to_inertial(&o.path, &o.plan, 0.0).unwrap();
        carousel_dynamics::invariants_of(&s, &fam.masses(), fam.alpha())
    };
    let (ia, ib) = (inv(&a), inv(&b));
    assert!((ia.energy - ib.energy).abs() < 1e-9 * ia.energy.abs());
    assert!((ia.angular_momentum - ib.angular_momentum).abs() < 1e-9 * ia.angular_momentum.abs());
}

#[test]
fn two_clusters_at_a_critical_phase() {
    let fam = family(&[0, 1]);
    let plan = plan_rational(&[1, 1], 200, 1, fam.alpha()).unwrap().with_phases(&[0.0, 0.5 * PI]).unwrap();
    let init = FourierPath::lift(&fam, &plan, 12).unwrap();
    let orbit = refine_orbit(&init, &plan, &fam, &RefineOptions { l: 12, ..RefineOptions::default() }).unwrap();
    assert!(orbit.report.final_residual < 1e-10, "{:?}", orbit.report);
    // the relative phase of two clusters only enters through the O(eps^4)
    // quadrupole coupling, so the bordered system is badly conditioned and
    // Newton cannot polish below the 1e-11 level
    assert!(orbit.report.condition.unwrap() > 1e8);
    for i in 0..10 {
        let t = 2.0 * PI * i as f64 / 10.0;
        assert!(nbody_residual(&orbit.path, &plan, &fam, t).unwrap() < 1e-6);
    }
}

#[test]
fn refined_orbit_is_a_fixed_point() {
    let (fam, plan, orbit) = refined(315, 0.0);
    let again = refine_orbit(&orbit.path, &plan, &fam, &RefineOptions { l: orbit.path.l, ..RefineOptions::default() })
        .unwrap();
    assert_eq!(again.report.iterations, 0);
    assert!(again.path.distance(&orbit.path) < 1e-12);
    assert!(orbit.report.symmetry_residual.abs() < 1e-12);
    let json = serde_json::to_string(&orbit).unwrap();
    let back: RefinedOrbit = serde_json::from_str(&json).unwrap();
    assert_eq!(back, orbit);
}

#[test]
fn gradient_sees_only_non_symmetric_perturbations() {
    let fam = family(&[0]);
    let plan = plan_rational(&[1], 315, 1, fam.alpha()).unwrap();
    let lift = FourierPath::lift(&fam, &plan, 6).unwrap();
    let base = projected_gradient_norm(&lift, &plan, &fam).unwrap();
    // a rigid rotation of the whole lift is another critical point at leading order
    let mut rotated = lift.clone();
    let (c, s) = (0.4f64.cos(), 0.4f64.sin());
    for z in rotated.coeffs[0].chunks_mut(2) {
        let (x, y) = (z[0], z[1]);
        z[0] = x * c - y * s;
        z[1] = x * s + y * c;
    }
    let rot = projected_gradient_norm(&rotated, &plan, &fam).unwrap();
    assert!((rot - base).abs() < 1e-12, "{rot:e} vs {base:e}");
    // a first-harmonic wobble is not
    let mut wobble = lift.clone();
    wobble.coeffs[1][0] = carousel_core::Complex64::new(1e-3, 0.0);
    wobble.coeffs[1][1] = carousel_core::Complex64::new(0.0, 1e-3);
    assert!(projected_gradient_norm(&wobble, &plan, &fam).unwrap() > 100.0 * base);
}

#[test]
fn correction_is_of_order_eps() {
    let fam = family(&[0]);
    let run = |p: i64| {
        let plan = plan_rational(&[1], p, 1, fam.alpha()).unwrap();
        let init = FourierPath::lift(&fam, &plan, 12).unwrap();
        let o = refine_orbit(&init, &plan, &fam, &RefineOptions { l: 12, ..RefineOptions::default() }).unwrap();
        (plan.eps, o.report.displacement)
    };
    let (e1, d1) = run(315);
    let (e2, d2) = run(750);
    let c = d2 / e2;
    assert!(d1 <= 4.0 * c * e1, "{d1:e} at eps {e1}, {d2:e} at eps {e2}");
    assert!(d1 < e1);
}

#[test]
fn rejects_mismatched_inputs() {
    let fam = family(&[0]);
    let plan = plan_rational(&[1, 1], 50, 1, fam.alpha()).unwrap();
    assert!(FourierPath::lift(&fam, &plan, 4).is_err());
    let plan = plan_rational(&[1], 50, 1, fam.alpha()).unwrap();
    let path = FourierPath::lift(&fam, &plan, 4).unwrap();
    let opts = RefineOptions { l: 8, max_l: 4, ..RefineOptions::default() };
    assert!(matches!(refine_orbit(&path, &plan, &fam, &opts), Err(RefineError::Invalid(_))));
}
