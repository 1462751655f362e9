//! The Lagrange triangle with three arbitrary masses.

use carousel_cc::mass_beta;
use carousel_core::{Alpha, Complex64};
use serde::{Deserialize, Serialize};

use crate::{kepler_resonance, CertResult, SpectralError, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangeCertificate {
    #[serde(flatten)]
    pub result: CertResult,
    pub beta: f64,
    /// `9 ((3 - alpha)/(1 + alpha))^2`.
    pub routh_bound: f64,
    /// `lambda_1^+, lambda_1^-, lambda_2^+, lambda_2^-`.
    pub eigenvalues: [Complex64; 4],
}

/// `lambda_{1,2}^+- = +-(i/6) sqrt(18(1-alpha) +- 6 sqrt(9(alpha-1)^2 - beta(alpha+3)^2))`.
pub fn lagrange_eigenvalues(beta: f64, alpha: Alpha) -> [Complex64; 4] {
    let a = alpha.value();
    let d = Complex64::new(9.0 * (a - 1.0).powi(2) - beta * (a + 3.0).powi(2), 0.0).sqrt();
    let base = Complex64::new(18.0 * (1.0 - a), 0.0);
    let i6 = Complex64::new(0.0, 1.0 / 6.0);
    let l1 = i6 * (base + d * 6.0).sqrt();
    let l2 = i6 * (base - d * 6.0).sqrt();
    [l1, -l1, l2, -l2]
}

/// `2 pi p` check of the Lagrange triangle. For `alpha = 2` the integer
/// `p` is read as the symmetry mode `m` of `2 pi/m`-periodic paths.
pub fn certify_lagrange(
    m1: f64,
    m2: f64,
    m3: f64,
    alpha: Alpha,
    p: i64,
) -> Result<LagrangeCertificate, SpectralError> {
    if [m1, m2, m3].iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(SpectralError::Invalid("masses must be positive".into()));
    }
    if p == 0 {
        return Err(SpectralError::Invalid("p must be nonzero".into()));
    }
    let a = alpha.value();
    let beta = mass_beta(m1, m2, m3);
    let bound = 9.0 * ((3.0 - a) / (1.0 + a)).powi(2);
    let mut res = CertResult::new(format!("lagrange masses=({m1},{m2},{m3}) alpha={alpha} p={p}"), false);
    res.margin = beta - bound;
    res.modes_checked = 2;

    let gap = beta - bound;
    if gap.abs() <= 1e-12 * bound.max(1.0) {
        res.log(format!("beta = {beta} equals the bound {bound}: boundary case"));
        res.doubt(1, 0);
    } else if gap > 0.0 {
        res.log(format!("beta = {beta} > {bound}"));
    } else {
        res.log(format!("beta = {beta} < {bound}: the remaining eigenvalue pairs are real"));
        res.doubt(1, 0);
    }

    if alpha.is_gravitational() {
        if p.abs() >= 2 {
            res.log(format!("Kepler block: mode m = {} avoids l = +-1", p.abs()));
        } else {
            res.log("Kepler block: m = 1 hits the homographic resonance l = +-1");
            res.refute(3, 1);
            res.refute(3, -1);
        }
    } else {
        match kepler_resonance(alpha, p) {
            Some(l) => {
                res.log(format!("Kepler block: |p| sqrt(3-alpha) = {l}"));
                res.refute(3, l);
                res.refute(3, -l);
            }
            None => res.log("Kepler block: |p| sqrt(3-alpha) is not a positive integer"),
        }
    }
    if res.verdict == Verdict::Refuted {
        res.failing_modes.retain(|f| f.block == 3);
    }
    Ok(LagrangeCertificate { result: res, beta, routh_bound: bound, eigenvalues: lagrange_eigenvalues(beta, alpha) })
}
