use carousel_cc::{amended_potential, polygon_config};
use carousel_core::{Alpha, Complex64, Mat2C};
use carousel_interval::{DdInterval, Enclosure, Interval};
use carousel_spectral::*;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn alpha(x: f64) -> Alpha {
    Alpha::new(x).unwrap()
}

// closed forms for the square with alpha = 2
fn square_s() -> (f64, f64) {
    ((1.0 + 2.0 * 2f64.sqrt()) / 4.0, 2f64.sqrt())
}

#[test]
fn log_s_closed_form() {
    assert!((s_coeff(5, 2, Alpha::LOG) - 3.0).abs() < 1e-13);
    for k in 2..=50usize {
        for j in 0..=k {
            let twice = 2.0 * s_coeff(k, j, Alpha::LOG);
            let exact = (j * (k - j)) as f64;
            assert!((twice - exact).abs() < 1e-10 * exact.max(1.0), "k={k} j={j}");
            assert_eq!(twice.round() as usize, j * (k - j));
        }
    }
}

#[test]
fn s_k_vanishes() {
    for k in 2..20 {
        for a in [1.0, 1.5, 2.0, 2.7] {
            assert_eq!(s_coeff(k, k, alpha(a)), 0.0);
            assert_eq!(s_coeff(k, 0, alpha(a)), 0.0);
        }
    }
}

#[test]
fn square_newton_values() {
    let (s1, s2) = square_s();
    assert!((s_coeff(4, 1, Alpha::NEWTON) - s1).abs() < 1e-14);
    assert!((s_coeff(4, 2, Alpha::NEWTON) - s2).abs() < 1e-14);
    assert!((s1 - 0.95711).abs() < 1e-5 && (s2 - 1.41421).abs() < 1e-5);
    let (a2, b2, g2) = block_coefficients(4, 2, Alpha::NEWTON);
    assert!((a2 - 0.5).abs() < 1e-14);
    assert!(g2.abs() < 1e-14);
    let beta = 1.5 / s1 * (s2 - s1);
    assert!((b2 - beta).abs() < 1e-14);
    assert!((b2 - 0.716389).abs() < 1e-6);
}

#[test]
fn kepler_and_translation_coefficients() {
    for k in 3..12 {
        for a in [1.0, 1.3, 2.0, 2.5] {
            let al = alpha(a);
            let (ak, bk, gk) = block_coefficients(k, k, al);
            assert!((ak - (a - 1.0) / 2.0).abs() < 1e-13);
            assert!((bk + (a + 1.0) / 2.0).abs() < 1e-13);
            assert!(gk.abs() < 1e-13);
            let (a1, b1, g1) = block_coefficients(k, 1, al);
            let s1 = s_coeff(k, 1, al);
            let expect = (a - 1.0) * s_coeff(k, 2, al) / (4.0 * s1);
            assert!(b1.abs() < 1e-13);
            assert!((a1 - expect).abs() < 1e-13 && (g1 - expect).abs() < 1e-13);
        }
    }
}

#[test]
fn s_symmetry_periodicity_monotonicity() {
    let ks: Vec<usize> = (2..=200).chain((201..=1000).step_by(37)).chain([1000]).collect();
    for &k in &ks {
        for a in [1.0, 1.5, 2.0, 2.5] {
            let spec = PolygonSpectrum::new(k, alpha(a)).unwrap();
            for j in 0..=k {
                let sym = spec.s[k - j];
                assert!((spec.s[j] - sym).abs() <= 1e-12 * spec.s[j].abs().max(1.0), "k={k} j={j}");
                assert_eq!(spec.s_at(j as i64 + k as i64), spec.s[j % k]);
                assert_eq!(spec.s_at(-(j as i64)), spec.s[(k - j) % k]);
            }
            for j in 1..=k / 2 {
                assert!(spec.s[j] > spec.s[j - 1], "k={k} a={a} j={j}");
            }
        }
    }
}

#[test]
fn log_determinant_closed_form() {
    for k in 4..=10 {
        let spec = PolygonSpectrum::new(k, Alpha::LOG).unwrap();
        for j in 1..=k {
            let (_, bj, _) = spec.coefficients(j);
            for i in 0..100 {
                let lam = -3.0 + 6.0 * i as f64 / 99.0;
                let expect = (lam * lam - 1.0).powi(2) - bj * bj;
                assert!((spec.det(j, lam) - expect).abs() < 1e-12 * expect.abs().max(1.0));
                assert!((det_m(k, j, Alpha::LOG, lam) - expect).abs() < 1e-12 * expect.abs().max(1.0));
            }
        }
    }
}

#[test]
fn kepler_block_eigenvalues() {
    for i in 1..=50 {
        let a = 1.0 + 2.0 * i as f64 / 51.0;
        let al = alpha(a);
        let z = kepler_zero(al).unwrap();
        assert!(kepler_mu(al, z).0.abs() < 1e-12);
        for k in [3usize, 6, 11] {
            let ev = block_m(k, k, al, 0.37 * i as f64 / 10.0).hermitian_eigenvalues();
            let (mm, mp) = kepler_mu(al, 0.37 * i as f64 / 10.0);
            assert!((ev[0] - mm).abs() < 1e-9 * mp && (ev[1] - mp).abs() < 1e-9 * mp);
        }
    }
    assert_eq!(kepler_mu(Alpha::NEWTON, 1.0).0, 0.0);
    assert_eq!(kepler_zero(Alpha::NEWTON).unwrap(), 1.0);
    assert_eq!(kepler_zero(Alpha::LOG).unwrap(), 2f64.sqrt());
    assert!(kepler_zero(alpha(3.0)).is_err());
    for i in 0..400 {
        let lam = -10.0 + 0.05 * i as f64;
        for a in [1.0, 1.7, 2.0, 2.9, 4.0] {
            assert!(kepler_mu(alpha(a), lam).1 > 0.0);
        }
    }
}

fn block_diag(blocks: &[Mat2C]) -> DMatrix<Complex64> {
    let n = 2 * blocks.len();
    let mut d = DMatrix::zeros(n, n);
    for (i, b) in blocks.iter().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                d[(2 * i + r, 2 * i + c)] = b.0[r][c];
            }
        }
    }
    d
}

#[test]
fn hessian_block_diagonalizes() {
    for k in 3..=8 {
        for a in [1.0, 1.5, 2.0] {
            let al = alpha(a);
            let cc = polygon_config(k, al).unwrap();
            let h = amended_potential(&cc.positions, &cc.masses, al, 2).unwrap().hessian.unwrap();
            let p = isotypic_basis(k);
            let unit = (p.adjoint() * &p - DMatrix::identity(2 * k, 2 * k)).camax();
            assert!(unit < 1e-13);
            let conj = p.adjoint() * h.map(|x| Complex64::new(x, 0.0)) * &p;
            let spec = PolygonSpectrum::new(k, al).unwrap();
            let err = (conj - block_diag(&spec.blocks)).camax();
            assert!(err < 1e-8, "k={k} a={a} err={err:e}");
        }
    }
}

#[test]
fn reduced_t_spectrum_matches_blocks() {
    for k in 3..=7 {
        for a in [1.5, 2.0, 2.5] {
            let al = alpha(a);
            let cc = polygon_config(k, al).unwrap();
            let spec = PolygonSpectrum::new(k, al).unwrap();
            for (ell, p) in [(0i64, 1i64), (1, 1), (3, 2), (-2, 3), (5, 1)] {
                let t = hat_t_block(&cc, ell, p).unwrap();
                assert_eq!(t.nrows(), 2 * k - 2);
                let mut got: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
                let scale = 1.0 / (1.0 + (ell * ell) as f64);
                let mut want: Vec<f64> =
                    spec.reduced_spectrum(ell as f64 / p as f64).iter().map(|x| x * scale).collect();
                got.sort_by(f64::total_cmp);
                want.sort_by(f64::total_cmp);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-8, "k={k} a={a} l={ell}: {got:?} vs {want:?}");
                }
            }
        }
    }
}

#[test]
fn t_block_tends_to_mass_matrix() {
    let cc = carousel_cc::lagrange_config(1.0, 2.0, 3.0, Alpha::NEWTON).unwrap();
    let p = 2;
    let b = carousel_cc::reduced_basis(&cc.masses);
    let mut m = DMatrix::zeros(6, 6);
    for (i, mi) in cc.masses.iter().enumerate() {
        m[(2 * i, 2 * i)] = *mi;
        m[(2 * i + 1, 2 * i + 1)] = *mi;
    }
    let limit = (b.transpose() * m * &b / (p * p) as f64).map(|x| Complex64::new(x, 0.0));
    let mut prev = f64::INFINITY;
    for ell in [10i64, 100, 1000, 10000] {
        let t = hat_t_block(&cc, ell, p).unwrap();
        let dist = (&t - &limit).camax();
        assert!(dist < prev);
        prev = dist;
        let ev = SymmetricEigen::new(t).eigenvalues;
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(0.0, f64::max);
        if ell >= 100 {
            assert!(lo > 0.0 && hi / lo < 4.0, "l={ell}: {lo} {hi}");
        }
    }
    assert!(prev < 1e-3);
}

#[test]
fn interval_enclosures_of_square_determinant() {
    let (s1, s2) = square_s();
    let beta = 1.5 / s1 * (s2 - s1);
    let p0 = 1.5 * 1.5 - beta * beta;
    let p1 = 0.5 * 4.5 - beta * beta;
    let s1i: Interval = s_coeff_interval(4, 1, Alpha::NEWTON).unwrap();
    let s2i: Interval = s_coeff_interval(4, 2, Alpha::NEWTON).unwrap();
    assert!(s1i.contains(s1) && s2i.contains(s2));
    let bi = (s2i - s1i) * Interval::point(1.5) * s1i.recip().unwrap();
    let enc = Interval::point(2.25) - bi.sqr();
    assert!(enc.excludes_zero() && enc.width() < 1e-10);
    assert!((enc.mid() - p0).abs() < 1e-13 && (p0 - 1.7368).abs() < 1e-4);
    assert!((p1 - p0).abs() < 1e-14);
    let dd: DdInterval = s_coeff_interval(4, 1, Alpha::NEWTON).unwrap();
    let (l, h) = dd.bounds();
    assert!(s1i.lo() <= l && h <= s1i.hi());
    assert!(s_coeff_interval::<Interval>(4, 1, alpha(1.5)).is_err());
}

#[test]
fn interval_s_contains_float() {
    for k in [4usize, 17, 100, 333] {
        let spec = PolygonSpectrum::new(k, Alpha::NEWTON).unwrap();
        for j in 1..k {
            let e: Interval = s_coeff_interval(k, j, Alpha::NEWTON).unwrap();
            let slack = 1e-13 * spec.s[j];
            assert!(e.lo() - slack <= spec.s[j] && spec.s[j] <= e.hi() + slack);
            assert!(e.width() / e.lo() < 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn det_m_is_block_determinant(k in 3usize..40, jr in 0.0f64..1.0, a in 1.0f64..3.0, lam in -5.0f64..5.0) {
        let j = 1 + ((k - 1) as f64 * jr) as usize;
        let al = alpha(a);
        let m = block_m(k, j, al, lam);
        prop_assert!(m.is_hermitian(1e-14));
        let direct = m.det();
        let p = det_m(k, j, al, lam);
        let scale = m.0.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max).powi(2);
        prop_assert!(direct.im.abs() < 1e-12 * scale);
        prop_assert!((direct.re - p).abs() < 1e-12 * scale);
        prop_assert!(block_b(k, j, al).is_hermitian(1e-14));
    }
}
