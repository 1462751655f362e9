use carousel_core::{center_of_mass_project, dphi, phi, Alpha, ClusterConfig, ClusterIndex};
use proptest::prelude::*;

/// `int_r^inf s^-alpha ds` by composite Simpson after `s = r / u^2`.
fn phi_by_quadrature(r: f64, alpha: f64) -> f64 {
    let n = 2000;
    let h = 1.0 / n as f64;
    let f = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            let t = u * u;
            (r / t).powf(-alpha) * r / (t * t) * 2.0 * u
        }
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn phi_cube_law_against_quadrature() {
    let a = Alpha::new(3.0).unwrap();
    let v = phi(2.0, a).unwrap();
    assert!((v - 0.125).abs() < 1e-15);
    assert!((v - phi_by_quadrature(2.0, 3.0)).abs() < 1e-12);
}

#[test]
fn phi_general_against_quadrature() {
    for (r, al) in [(0.7, 2.5), (1.3, 4.0), (3.0, 2.0)] {
        let v = phi(r, Alpha::new(al).unwrap()).unwrap();
        assert!((v - phi_by_quadrature(r, al)).abs() < 1e-9 * v.abs().max(1.0));
    }
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), 1.0f64..4.0]
}

proptest! {
    #[test]
    fn phi_is_decreasing(al in alpha_strategy(), r in 0.01f64..50.0, dr in 1e-3f64..5.0) {
        let a = Alpha::new(al).unwrap();
        prop_assert!(a.phi(r + dr) < a.phi(r));
    }

    #[test]
    fn dphi_contract(al in alpha_strategy(), r in 0.01f64..50.0) {
        let a = Alpha::new(al).unwrap();
        let d = dphi(r, a).unwrap();
        prop_assert!((d * r.powf(al) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn centering_is_idempotent(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0.1f64..5.0), 2..8)
    ) {
        let positions: Vec<_> = pts.iter().map(|p| [p.0, p.1]).collect();
        let masses: Vec<_> = pts.iter().map(|p| p.2).collect();
        let cfg = ClusterConfig::flat(positions, masses.clone()).unwrap();
        let once = center_of_mass_project(&cfg);
        let twice = center_of_mass_project(&once);
        let mut sx = 0.0;
        let mut sy = 0.0;
        for (q, m) in once.positions.iter().zip(&masses) {
            sx += m * q[0];
            sy += m * q[1];
        }
        prop_assert!(sx.abs() < 1e-13 && sy.abs() < 1e-13);
        for (a, b) in once.positions.iter().zip(&twice.positions) {
            prop_assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn index_round_trip(sizes in prop::collection::vec(2usize..5, 0..4), singles in 0usize..4) {
        let mut s = sizes.clone();
        s.extend(std::iter::repeat_n(1, singles));
        prop_assume!(!s.is_empty());
        let idx = ClusterIndex::new(s).unwrap();
        for f in 0..idx.total() {
            let (j, k) = idx.multi_index(f).unwrap();
            prop_assert_eq!(idx.flat_index(j, k).unwrap(), f);
        }
        prop_assert_eq!(idx.n0(), sizes.len());
    }
}

#[test]
fn config_json_round_trip() {
    let cfg = ClusterConfig::new(
        ClusterIndex::new(vec![2, 1]).unwrap(),
        vec![[0.5, 0.0], [-0.5, 0.0], [3.0, 1.0]],
        vec![0.5, 0.5, 2.0],
    )
    .unwrap();
    let s = serde_json::to_string(&cfg).unwrap();
    let back: ClusterConfig = serde_json::from_str(&s).unwrap();
    assert_eq!(cfg, back);
}
