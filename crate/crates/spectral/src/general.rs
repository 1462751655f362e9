//! Numerical nondegeneracy checks for arbitrary central configurations via
//! the blocks `T_l = (l/p)^2 M - 2i (l/p) M J + Hess V[a]` on the
//! zero-center-of-mass subspace.

use std::f64::consts::PI;

use carousel_cc::{amended_potential, reduced_basis, CentralConfiguration};
use carousel_core::Complex64;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{CertResult, SpectralError, Verdict};

#[derive(Clone, Copy, Debug)]
pub struct GeneralOptions {
    pub tol: f64,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions { tol: 1e-8 }
    }
}

/// Columns `2(j-1)+c` hold `T_j e_c` with
/// `T_j(w) = k^-1/2 (e^(i j l zeta) e^(l zeta J) w)_{l=1..k}`.
pub fn isotypic_basis(k: usize) -> DMatrix<Complex64> {
    let zeta = 2.0 * PI / k as f64;
    let norm = 1.0 / (k as f64).sqrt();
    let mut p = DMatrix::zeros(2 * k, 2 * k);
    for j in 1..=k {
        for l in 1..=k {
            let phase = Complex64::from_polar(norm, (j * l % k) as f64 * zeta);
            let (s, c) = (l as f64 * zeta).sin_cos();
            let rot = [[c, -s], [s, c]];
            for r in 0..2 {
                for col in 0..2 {
                    p[(2 * (l - 1) + r, 2 * (j - 1) + col)] = phase * rot[r][col];
                }
            }
        }
    }
    p
}

fn hessian(cc: &CentralConfiguration) -> Result<DMatrix<f64>, SpectralError> {
    let e = amended_potential(&cc.positions, &cc.masses, cc.alpha, 2)?;
    Ok(e.hessian.expect("order 2 returns a Hessian"))
}

fn assemble(cc: &CentralConfiguration, h: &DMatrix<f64>, lambda: f64) -> DMatrix<Complex64> {
    let n = 2 * cc.len();
    let mut t = h.map(|x| Complex64::new(x, 0.0));
    for (i, &m) in cc.masses.iter().enumerate() {
        let (x, y) = (2 * i, 2 * i + 1);
        t[(x, x)] += m * lambda * lambda;
        t[(y, y)] += m * lambda * lambda;
        // -2i lambda m J with J = [[0,-1],[1,0]]
        t[(x, y)] += Complex64::new(0.0, 2.0 * lambda * m);
        t[(y, x)] += Complex64::new(0.0, -2.0 * lambda * m);
    }
    let b = reduced_basis(&cc.masses).map(|x| Complex64::new(x, 0.0));
    debug_assert_eq!(b.nrows(), n);
    b.adjoint() * t * b
}

/// `T_l` without the `(1 + l^2)^-1` factor, on the reduced subspace.
pub fn hat_t_unscaled(cc: &CentralConfiguration, ell: i64, p: i64) -> Result<DMatrix<Complex64>, SpectralError> {
    if p == 0 {
        return Err(SpectralError::Invalid("p must be nonzero".into()));
    }
    let h = hessian(cc)?;
    Ok(assemble(cc, &h, ell as f64 / p as f64))
}

/// `(1 + l^2)^-1 P((l/p)^2 M - 2i(l/p) M J + Hess V[a]) P` in the
/// orthonormal reduced basis.
pub fn hat_t_block(cc: &CentralConfiguration, ell: i64, p: i64) -> Result<DMatrix<Complex64>, SpectralError> {
    let t = hat_t_unscaled(cc, ell, p)?;
    let scale = 1.0 / (1.0 + (ell * ell) as f64);
    Ok(t.map(|z| z * scale))
}

/// Eigenvalues of the reduced Hessian with the rotational zero mode (the
/// eigenvector closest to `B^T J a`) removed, plus that mode's eigenvalue
/// and cosine.
fn split_rotation(cc: &CentralConfiguration, h: &DMatrix<f64>) -> (Vec<f64>, f64, f64) {
    let b = reduced_basis(&cc.masses);
    let hr = b.transpose() * h * &b;
    let eig = SymmetricEigen::new(hr);
    let z: DVector<f64> = b.transpose() * cc.rotation_generator();
    let zn = z.norm();
    let mut best = (0, -1.0);
    for i in 0..eig.eigenvalues.len() {
        let cos = if zn > 0.0 { eig.eigenvectors.column(i).dot(&z).abs() / zn } else { 0.0 };
        if cos > best.1 {
            best = (i, cos);
        }
    }
    let rest = (0..eig.eigenvalues.len()).filter(|&i| i != best.0).map(|i| eig.eigenvalues[i]).collect();
    (rest, eig.eigenvalues[best.0], best.1)
}

/// Nondegeneracy of `a_0` as a critical point of the amended potential:
/// exactly one reduced Hessian eigenvalue below `tol`, along `J a_0`.
pub fn certify_a0(cc0: &CentralConfiguration, tol: f64) -> Result<CertResult, SpectralError> {
    let h = hessian(cc0)?;
    let mut res = CertResult::new(format!("a0 with {} bodies, alpha={}", cc0.len(), cc0.alpha), false);
    let zero_mode = (&h * cc0.rotation_generator()).norm();
    res.log(format!("|Hess V[a0] J a0| = {zero_mode:.3e}"));
    let (rest, rot_eig, cos) = split_rotation(cc0, &h);
    let mut small: Vec<f64> = rest.iter().copied().filter(|l| l.abs() < tol).collect();
    let rot_small = rot_eig.abs() < tol;
    if rot_small {
        small.push(rot_eig);
    }
    res.modes_checked = rest.len() + 1;
    res.margin = rest.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    res.log(format!("kernel dimension (|eig| < {tol:e}): {}", small.len()));
    res.log(format!("rotational mode eigenvalue {rot_eig:.3e}, cosine with J a0 {cos:.12}"));
    match small.len() {
        0 => {
            res.log("no eigenvalue below tolerance: a0 is not critical to this accuracy");
            res.doubt(0, 0);
        }
        1 if rot_small && cos > 1.0 - 1e-6 => {
            if res.margin < 10.0 * tol {
                res.log(format!("second eigenvalue {:.3e} within 10x tolerance", res.margin));
                res.doubt(0, 0);
            }
        }
        1 => {
            res.log("the only kernel direction is not the rotation");
            res.refute(0, 0);
        }
        _ => {
            res.refute(0, 0);
        }
    }
    Ok(res)
}

/// Sweep of `T_l` for `l = 0..=l_max`, where `l_max` is the first mode with
/// `(l/p)^2 min m > 2 |Hess V| + 2 (l/p) max m`; beyond it the quadratic
/// term dominates. Negative `l` give complex conjugate blocks with the
/// same spectrum.
pub fn certify_general(cc: &CentralConfiguration, p: i64, tol: f64) -> Result<CertResult, SpectralError> {
    if p == 0 {
        return Err(SpectralError::Invalid("p must be nonzero".into()));
    }
    let pa = p.abs();
    let h = hessian(cc)?;
    let hnorm = SymmetricEigen::new(h.clone()).eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mmin = cc.masses.iter().copied().fold(f64::INFINITY, f64::min);
    let mmax = cc.masses.iter().copied().fold(0.0, f64::max);
    // (l/p)^2 mmin - 2 (l/p) mmax - 2 hnorm > 0
    let lam = (mmax + (mmax * mmax + 2.0 * mmin * hnorm).sqrt()) / mmin;
    let lmax = (lam * pa as f64).floor() as i64 + 1;
    let mut res = CertResult::new(format!("general {} bodies, alpha={}, p={p}", cc.len(), cc.alpha), false);
    res.log(format!("|Hess V| = {hnorm:.6}, sweeping l = 0..={lmax}"));

    let (rest, rot_eig, cos) = split_rotation(cc, &h);
    res.log(format!("l=0: rotational mode eigenvalue {rot_eig:.3e} (cosine {cos:.9}) excluded"));
    let check = |res: &mut CertResult, ell: i64, eigs: &[f64]| {
        let m = eigs.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        res.observe(m);
        if m < tol {
            res.refute(0, ell);
            if ell != 0 {
                res.failing_modes.push(crate::FailingMode { block: 0, ell: -ell });
            }
        } else if m < 10.0 * tol {
            res.doubt(0, ell);
        }
    };
    check(&mut res, 0, &rest);
    for ell in 1..=lmax {
        let t = assemble(cc, &h, ell as f64 / pa as f64);
        let eigs = SymmetricEigen::new(t).eigenvalues;
        check(&mut res, ell, eigs.as_slice());
    }
    if res.verdict == Verdict::Certified {
        res.log(format!("smallest |eigenvalue| over the sweep {:.6e}", res.margin));
    }
    Ok(res)
}
