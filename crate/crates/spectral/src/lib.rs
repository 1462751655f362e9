//! Spectral blocks of polygonal and triangular central configurations and
//! the nondegeneracy certifiers built on them.

use std::f64::consts::PI;

use carousel_core::{Alpha, Mat2C};
use carousel_interval::{Enclosure, IntervalError};
use serde::{Deserialize, Serialize};

mod general;
mod lagrange;
mod polygon;

pub use general::{certify_a0, certify_general, hat_t_block, hat_t_unscaled, isotypic_basis, GeneralOptions};
pub use lagrange::{certify_lagrange, lagrange_eigenvalues, LagrangeCertificate};
pub use polygon::{
    certify_polygon_grav, certify_polygon_grav_range, certify_polygon_grav_with, certify_polygon_weak,
    kepler_resonance, log_resonances, verdict_of_all, GravOptions, Precision, WEAK_TOL,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Cc(#[from] carousel_cc::CcError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

/// A block index `j` together with the Fourier mode `l` at which its
/// determinant (or eigenvalue) was found to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingMode {
    pub block: usize,
    pub ell: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertResult {
    pub target: String,
    pub verdict: Verdict,
    /// Smallest `|det|` (float sweeps), smallest mignitude (interval
    /// sweeps) or smallest `|eigenvalue|` seen.
    pub margin: f64,
    pub modes_checked: usize,
    pub interval: bool,
    pub failing_modes: Vec<FailingMode>,
    pub conditions_log: Vec<String>,
}

impl CertResult {
    fn new(target: String, interval: bool) -> CertResult {
        CertResult {
            target,
            verdict: Verdict::Certified,
            margin: f64::INFINITY,
            modes_checked: 0,
            interval,
            failing_modes: Vec::new(),
            conditions_log: Vec::new(),
        }
    }

    fn log(&mut self, s: impl Into<String>) {
        self.conditions_log.push(s.into());
    }

    fn refute(&mut self, block: usize, ell: i64) {
        self.verdict = Verdict::Refuted;
        self.failing_modes.push(FailingMode { block, ell });
    }

    /// Marks the result inconclusive unless it is already refuted.
    fn doubt(&mut self, block: usize, ell: i64) {
        if self.verdict != Verdict::Refuted {
            self.verdict = Verdict::Inconclusive;
        }
        self.failing_modes.push(FailingMode { block, ell });
    }

    fn observe(&mut self, m: f64) {
        self.margin = self.margin.min(m);
        self.modes_checked += 1;
    }
}

/// `s_j = 2^-alpha sum_{l=1}^{k-1} sin^2(j l pi/k) / sin^(alpha+1)(l pi/k)`.
/// `j` is taken modulo `k`.
pub fn s_coeff(k: usize, j: usize, alpha: Alpha) -> f64 {
    let a = alpha.value();
    let jm = j % k;
    let mut s = 0.0;
    for l in 1..k {
        let num = ((jm * l % k) as f64 * PI / k as f64).sin();
        let den = (l as f64 * PI / k as f64).sin();
        s += num * num * den.powf(-(a + 1.0));
    }
    s * 2f64.powf(-a)
}

/// Enclosure of `s_j` for an integer exponent `alpha`.
pub fn s_coeff_interval<E: Enclosure>(k: usize, j: usize, alpha: Alpha) -> Result<E, SpectralError> {
    let a = integer_alpha(alpha)?;
    let tab = SinTables::<E>::new(k, a)?;
    Ok(tab.s(j))
}

fn integer_alpha(alpha: Alpha) -> Result<i32, SpectralError> {
    match alpha.exact() {
        Some((n, 1)) if n <= 16 => Ok(n as i32),
        _ => Err(SpectralError::Invalid(format!("interval s_j needs an integer alpha, got {alpha}"))),
    }
}

/// `sin^2(x pi/k)` and `1/sin^(alpha+1)(l pi/k)` enclosures for one `k`.
pub(crate) struct SinTables<E> {
    k: usize,
    alpha: i32,
    sin2: Vec<E>,
    inv: Vec<E>,
}

impl<E: Enclosure> SinTables<E> {
    pub(crate) fn new(k: usize, alpha: i32) -> Result<Self, SpectralError> {
        if k < 2 {
            return Err(SpectralError::Invalid(format!("k must be at least 2, got {k}")));
        }
        let sines: Vec<E> = (0..k).map(|x| E::sin_pi_frac(x as u64, k as u64)).collect();
        let sin2 = sines.iter().map(|s| s.sqr()).collect();
        let mut inv = vec![E::point(0.0); k];
        for l in 1..k {
            let s = sines[l];
            let mut p = s;
            for _ in 0..alpha {
                p = p.mul_nonneg(&s);
            }
            inv[l] = p.recip()?;
        }
        Ok(SinTables { k, alpha, sin2, inv })
    }

    pub(crate) fn s(&self, j: usize) -> E {
        let k = self.k;
        let jm = j % k;
        if jm == 0 {
            return E::point(0.0);
        }
        let mut acc = E::point(0.0);
        for l in 1..k {
            acc = acc + self.sin2[jm * l % k].mul_nonneg(&self.inv[l]);
        }
        acc.scale_pow2(-self.alpha)
    }
}

/// Normal-form coefficients `(alpha_j, beta_j, gamma_j)` of the block `B_j`.
pub fn block_coefficients(k: usize, j: usize, alpha: Alpha) -> (f64, f64, f64) {
    let s = |i: usize| s_coeff(k, i, alpha);
    coefficients_from(alpha.value(), s(1), s(j + 1), s(j), s(j + k - 1))
}

fn coefficients_from(a: f64, s1: f64, sp: f64, sj: f64, sm: f64) -> (f64, f64, f64) {
    let c = (a - 1.0) / (4.0 * s1);
    (c * (sp + sm), (a + 1.0) / (2.0 * s1) * (sj - s1), c * (sp - sm))
}

/// `B_j = (1 + alpha_j) I - beta_j R - gamma_j iJ`.
pub fn block_b(k: usize, j: usize, alpha: Alpha) -> Mat2C {
    let (aj, bj, gj) = block_coefficients(k, j, alpha);
    b_from(aj, bj, gj)
}

fn b_from(aj: f64, bj: f64, gj: f64) -> Mat2C {
    Mat2C::identity().scale_re(1.0 + aj) - Mat2C::r().scale_re(bj) - Mat2C::ij().scale_re(gj)
}

/// `m_j(lambda) = lambda^2 I - 2 lambda iJ + B_j`.
pub fn block_m(k: usize, j: usize, alpha: Alpha, lambda: f64) -> Mat2C {
    m_from(block_b(k, j, alpha), lambda)
}

fn m_from(b: Mat2C, lambda: f64) -> Mat2C {
    Mat2C::identity().scale_re(lambda * lambda) - Mat2C::ij().scale_re(2.0 * lambda) + b
}

/// `P_j(lambda) = ((lambda-1)^2 + alpha_j - gamma_j)((lambda+1)^2 + alpha_j + gamma_j) - beta_j^2`,
/// the (real) determinant of `m_j(lambda)`.
pub fn det_m(k: usize, j: usize, alpha: Alpha, lambda: f64) -> f64 {
    let (aj, bj, gj) = block_coefficients(k, j, alpha);
    p_poly(aj, bj, gj, lambda)
}

#[inline]
pub(crate) fn p_poly(aj: f64, bj: f64, gj: f64, lambda: f64) -> f64 {
    let lm = lambda - 1.0;
    let lp = lambda + 1.0;
    (lm * lm + aj - gj) * (lp * lp + aj + gj) - bj * bj
}

/// Eigenvalues `(mu^-, mu^+)` of the Kepler block `m_k(lambda)`:
/// `(alpha+1)/2 + lambda^2 -+ 1/2 sqrt((alpha+1)^2 + 16 lambda^2)`.
pub fn kepler_mu(alpha: Alpha, lambda: f64) -> (f64, f64) {
    let h = 0.5 * (alpha.value() + 1.0);
    let l2 = lambda * lambda;
    let r = 0.5 * ((alpha.value() + 1.0).powi(2) + 16.0 * l2).sqrt();
    // (h + l2)^2 - r^2 = l2 (l2 + alpha - 3), so mu^- = that over mu^+
    let plus = h + l2 + r;
    let minus = l2 * (l2 + alpha.value() - 3.0) / plus;
    (minus, plus)
}

/// The positive zero `sqrt(3 - alpha)` of `mu^-`.
pub fn kepler_zero(alpha: Alpha) -> Result<f64, SpectralError> {
    if alpha.value() >= 3.0 {
        return Err(SpectralError::Invalid(format!("mu^- has no positive zero for alpha = {alpha} >= 3")));
    }
    Ok((3.0 - alpha.value()).sqrt())
}

/// The `s_j` and `B_j` data of the regular `k`-gon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpectrum {
    pub k: usize,
    pub alpha: Alpha,
    /// `s_0 ..= s_k`, with `s_0 = s_k = 0`.
    pub s: Vec<f64>,
    /// `B_1 ..= B_k`, stored at indices `0..k`.
    pub blocks: Vec<Mat2C>,
}

impl PolygonSpectrum {
    pub fn new(k: usize, alpha: Alpha) -> Result<PolygonSpectrum, SpectralError> {
        if k < 2 {
            return Err(SpectralError::Invalid(format!("k must be at least 2, got {k}")));
        }
        let s: Vec<f64> = (0..=k).map(|j| s_coeff(k, j, alpha)).collect();
        let blocks = (1..=k)
            .map(|j| {
                let (aj, bj, gj) = coefficients_from(alpha.value(), s[1], s[(j + 1) % k], s[j], s[j - 1]);
                b_from(aj, bj, gj)
            })
            .collect();
        Ok(PolygonSpectrum { k, alpha, s, blocks })
    }

    /// `s_j` for any integer `j`, using k-periodicity.
    pub fn s_at(&self, j: i64) -> f64 {
        self.s[j.rem_euclid(self.k as i64) as usize]
    }

    pub fn coefficients(&self, j: usize) -> (f64, f64, f64) {
        let k = self.k;
        coefficients_from(self.alpha.value(), self.s[1], self.s[(j + 1) % k], self.s[j % k], self.s[(j + k - 1) % k])
    }

    pub fn block(&self, j: usize) -> Mat2C {
        self.blocks[j - 1]
    }

    pub fn m(&self, j: usize, lambda: f64) -> Mat2C {
        m_from(self.block(j), lambda)
    }

    pub fn det(&self, j: usize, lambda: f64) -> f64 {
        let (a, b, g) = self.coefficients(j);
        p_poly(a, b, g, lambda)
    }

    /// `alpha_1 = (alpha-1) s_2 / (4 s_1)`; the translation-free parts of the
    /// `j = 1` and `j = k-1` blocks are `(lambda +- 1)^2 + 2 alpha_1`.
    pub fn restricted_alpha1(&self) -> f64 {
        (self.alpha.value() - 1.0) * self.s_at(2) / (4.0 * self.s[1])
    }

    /// Eigenvalues of `m_j(l/p)` over all blocks after removing the two
    /// translation directions, i.e. the spectrum of the polygon's
    /// unscaled `T_l` on the zero-center-of-mass subspace.
    pub fn reduced_spectrum(&self, lambda: f64) -> Vec<f64> {
        let k = self.k;
        let mut out = Vec::with_capacity(2 * k - 2);
        let a1 = self.restricted_alpha1();
        if k > 2 {
            out.push((lambda + 1.0).powi(2) + 2.0 * a1);
            out.push((lambda - 1.0).powi(2) + 2.0 * a1);
        }
        for j in 2..k.saturating_sub(1) {
            out.extend(self.m(j, lambda).hermitian_eigenvalues());
        }
        out.extend(self.m(k, lambda).hermitian_eigenvalues());
        out
    }
}
