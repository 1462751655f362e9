//! Certifiers for the regular polygon: the weak-force sweep in floating
//! point and the rigorous gravitational sweep in interval arithmetic.

use carousel_core::Alpha;
use carousel_interval::{DdInterval, Enclosure, Interval};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{p_poly, CertResult, PolygonSpectrum, SinTables, SpectralError, Verdict};

/// Determinants below this are treated as vanishing by the float sweep.
pub const WEAK_TOL: f64 = 1e-9;

/// Relative width above which an enclosure of `s_j` is reported as too
/// loose to trust.
const S_REL_WIDTH: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Extended,
}

impl Precision {
    /// Reads `CAROUSEL_PRECISION` (`double` or `extended`, default double).
    pub fn from_env() -> Result<Precision, SpectralError> {
        match std::env::var("CAROUSEL_PRECISION") {
            Err(_) => Ok(Precision::Double),
            Ok(v) => v.parse(),
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = SpectralError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(SpectralError::Invalid(format!("unknown precision {other:?}"))),
        }
    }
}

fn is_square(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Positive integer `l` with `l = |p| sqrt(3 - alpha)`, if any. Exact for
/// rational `alpha`; otherwise decided in floating point.
pub fn kepler_resonance(alpha: Alpha, p: i64) -> Option<i64> {
    let p = p.unsigned_abs() as i128;
    if alpha.value() >= 3.0 || p == 0 {
        return None;
    }
    match alpha.exact() {
        Some((a, b)) => {
            let (a, b) = (a as i128, b as i128);
            let n = p * p * (3 * b - a);
            if n % b != 0 {
                return None;
            }
            is_square(n / b).filter(|&l| l > 0).map(|l| l as i64)
        }
        None => {
            let x = p as f64 * (3.0 - alpha.value()).sqrt();
            let r = x.round();
            (r >= 1.0 && (x - r).abs() < WEAK_TOL).then_some(r as i64)
        }
    }
}

/// Integer modes `l >= 0` at which `det m_j(l/p)` vanishes for the
/// logarithmic polygon, from `l^2 (k-1) = p^2 j(k-j)` or
/// `l^2 (k-1) = p^2 (2(k-1) - j(k-j))`.
fn log_resonant_modes(k: usize, j: usize, p: i64) -> Vec<i64> {
    let (k, j, p) = (k as i128, j as i128, p as i128);
    let mut out = Vec::new();
    for rhs in [p * p * j * (k - j), p * p * (2 * (k - 1) - j * (k - j))] {
        if rhs >= 0 && rhs % (k - 1) == 0 {
            if let Some(l) = is_square(rhs / (k - 1)) {
                if !out.contains(&(l as i64)) {
                    out.push(l as i64);
                }
            }
        }
    }
    out
}

/// Diagnostics of the `alpha = 1` blocks `j = 2..k-2`: the exact resonant
/// modes next to the coarser test `p^2 j(k-j)/(k-1) in N`, flagging every
/// `j` where the two disagree.
pub fn log_resonances(k: usize, p: i64) -> Vec<String> {
    let mut out = Vec::new();
    for j in 2..k.saturating_sub(1) {
        let exact = log_resonant_modes(k, j, p);
        let num = (p as i128) * (p as i128) * (j * (k - j)) as i128;
        let coarse = num % (k as i128 - 1) == 0;
        if !exact.is_empty() || coarse {
            let note = if exact.is_empty() == !coarse { "" } else { " (tests disagree)" };
            out.push(format!(
                "alpha=1 limit, j={j}: resonant l = {exact:?}; p^2 j(k-j)/(k-1) integral: {coarse}{note}"
            ));
        }
    }
    out
}

fn sweep_bound(p: i64, aj: f64, bj: f64) -> i64 {
    let b = bj.abs();
    p * ((b * b).max(b) + 2.0 * aj + 1.0).sqrt().ceil() as i64 + p
}

/// Floating-point sweep of the blocks `m_j(l/p)` of the regular `k`-gon
/// for the exponent `alpha >= 1`. At `alpha = 1` the blocks `j = 2..k-2`
/// are decided in integer arithmetic.
pub fn certify_polygon_weak(k: usize, p: i64, alpha: Alpha) -> Result<CertResult, SpectralError> {
    if k < 3 {
        return Err(SpectralError::Invalid(format!("k must be at least 3, got {k}")));
    }
    if p == 0 {
        return Err(SpectralError::Invalid("p must be nonzero".into()));
    }
    let pa = p.abs();
    let spec = PolygonSpectrum::new(k, alpha)?;
    let mut res = CertResult::new(format!("polygon k={k} p={p} alpha={alpha}"), false);
    let log = alpha.is_logarithmic();

    match kepler_resonance(alpha, pa) {
        Some(l) => {
            res.log(format!("condition (i) fails: |p| sqrt(3-alpha) = {l}"));
            res.refute(k, l);
            res.refute(k, -l);
        }
        None => res.log("condition (i) holds: |p| sqrt(3-alpha) is not a positive integer"),
    }

    for j in 2..k - 1 {
        let (aj, bj, gj) = spec.coefficients(j);
        let lmax = sweep_bound(pa, aj, bj);
        let exact_hits = if log { log_resonant_modes(k, j, pa) } else { Vec::new() };
        for l in 0..=lmax {
            let det = p_poly(aj, bj, gj, l as f64 / pa as f64);
            res.observe(det.abs());
            let hit = if log { exact_hits.contains(&l) } else { det.abs() < WEAK_TOL };
            if hit {
                res.refute(j, l);
            }
        }
    }

    // translation-free parts of j = 1 and j = k-1
    let a1 = spec.restricted_alpha1();
    for l in 0..=2 * pa {
        let lam = l as f64 / pa as f64;
        let plus = (lam + 1.0).powi(2) + 2.0 * a1;
        let minus = (lam - 1.0).powi(2) + 2.0 * a1;
        res.observe(plus);
        res.observe(minus);
        let zero = if log { l == pa } else { minus < WEAK_TOL };
        if zero {
            res.refute(k - 1, l);
            res.refute(1, -l);
        }
    }
    if log {
        res.log("restricted blocks (l/p -+ 1)^2 + 2 alpha_1 vanish at l = +-p since alpha_1 = 0");
    }

    // Kepler block, l = 0 is the rotational mode
    let (ak, bk, gk) = spec.coefficients(k);
    for l in 1..=sweep_bound(pa, ak, bk) {
        let det = p_poly(ak, bk, gk, l as f64 / pa as f64);
        res.observe(det.abs());
    }
    if log {
        res.conditions_log.extend(log_resonances(k, pa));
    } else if alpha.value() < 1.5 {
        let notes = log_resonances(k, pa);
        if !notes.is_empty() {
            res.log(format!("{} blocks would resonate in the alpha = 1 limit", notes.len()));
            res.conditions_log.extend(notes);
        }
    }
    res.failing_modes.dedup();
    Ok(res)
}

fn ceil_sqrt(x: f64) -> i64 {
    x.sqrt().ceil() as i64
}

/// Options of the rigorous sweep.
#[derive(Clone, Copy, Debug, Default)]
pub struct GravOptions {
    /// Also sweep `l` up to `sqrt(beta_j^2 + 1)`, which is far beyond the
    /// point `l^2 > 1 + |beta_j|` where `P_j` is provably positive.
    pub full_range: bool,
}

/// Rigorous `2pi/m` check of the Newtonian `k`-gon in `f64` intervals.
pub fn certify_polygon_grav(k: usize, m: i64) -> Result<CertResult, SpectralError> {
    certify_polygon_grav_with::<Interval>(k, m, GravOptions::default())
}

/// Rigorous `2pi/m` check of the Newtonian `k`-gon in the enclosure type `E`.
///
/// The blocks `j = 2..k-2` are enclosed at every integer `l` from 0 up to
/// `ceil(sqrt(1 + |beta_j|)) + 1`; past `l^2 > 1 + |beta_j|` one has
/// `P_j(l) >= (l^2-1)^2 - beta_j^2 > 0` because `alpha_j -+ gamma_j >= 0`.
pub fn certify_polygon_grav_with<E: Enclosure>(
    k: usize,
    m: i64,
    opts: GravOptions,
) -> Result<CertResult, SpectralError> {
    if k < 4 {
        return Err(SpectralError::Invalid(format!("k must be at least 4, got {k}")));
    }
    if m < 1 {
        return Err(SpectralError::Invalid(format!("mode m must be positive, got {m}")));
    }
    let mut res = CertResult::new(format!("polygon k={k} m={m} alpha=2"), true);
    let tab = SinTables::<E>::new(k, 2)?;
    let mut s = vec![E::point(0.0); k + 1];
    for j in 1..=k / 2 {
        s[j] = tab.s(j);
        s[k - j] = s[j];
    }
    let mut worst_rel: f64 = 0.0;
    for sj in &s[1..k] {
        let (lo, _) = sj.bounds();
        worst_rel = worst_rel.max(sj.width() / lo);
    }
    res.log(format!("max relative width of s_j enclosures: {worst_rel:.2e}"));
    if !(worst_rel < S_REL_WIDTH) {
        res.log("s_j enclosures too wide");
        res.doubt(0, 0);
    }
    let inv_s1 = s[1].recip()?;
    let quarter = inv_s1.scale_pow2(-2);
    let three_half = inv_s1 * E::point(1.5);
    let one = E::point(1.0);
    let mut argmin = None;

    for j in 2..=k - 2 {
        let a = (s[j + 1] + s[j - 1]) * quarter;
        let g = (s[j + 1] - s[j - 1]) * quarter;
        let b = (s[j] - s[1]) * three_half;
        let (blo, bhi) = b.bounds();
        let bmax = blo.abs().max(bhi.abs());
        let mut lmax = ceil_sqrt(1.0 + bmax) + 1;
        if opts.full_range {
            lmax = lmax.max(ceil_sqrt(bmax * bmax + 1.0));
        }
        let amg = a - g;
        let apg = a + g;
        let b2 = b.sqr();
        for l in 0..=lmax {
            let lam = E::point(l as f64);
            let det = ((lam - one).sqr() + amg) * ((lam + one).sqr() + apg) - b2;
            if det.excludes_zero() {
                let mig = det.mig();
                if mig < res.margin {
                    argmin = Some((j, l));
                }
                res.observe(mig);
            } else {
                res.observe(0.0);
                res.doubt(j, l);
            }
        }
    }

    if let Some((j, l)) = argmin {
        res.log(format!("smallest |P_j(l)| lower bound {:.6e} at j={j}, l={l}", res.margin));
    }
    let a1 = s[2] * quarter;
    let (a1lo, _) = a1.bounds();
    res.modes_checked += 1;
    if a1lo > 0.0 {
        res.log(format!("restricted blocks j=1,k-1: (l -+ 1)^2 + 2 alpha_1 >= {:.6e}", 2.0 * a1lo));
    } else {
        res.log("restricted blocks j=1,k-1: alpha_1 enclosure reaches zero");
        res.doubt(1, 1);
    }

    if m == 1 {
        res.log("Kepler block: mu_k^- vanishes at l = +-1 (homographic resonance)");
        res.refute(k, 1);
        res.refute(k, -1);
    } else {
        res.log(format!("Kepler block: mu_k^- vanishes only at l^2 = 1, and l in {m}Z has |l| >= {m}"));
    }
    Ok(res)
}

/// Runs the gravitational certifier over a range of `k` in parallel on
/// the current rayon pool. Results are in `k` order.
pub fn certify_polygon_grav_range(
    ks: std::ops::RangeInclusive<usize>,
    m: i64,
    precision: Precision,
    opts: GravOptions,
) -> Vec<Result<CertResult, SpectralError>> {
    let ks: Vec<usize> = ks.collect();
    ks.par_iter()
        .map(|&k| match precision {
            Precision::Double => certify_polygon_grav_with::<Interval>(k, m, opts),
            Precision::Extended => certify_polygon_grav_with::<DdInterval>(k, m, opts),
        })
        .collect()
}

/// Worst verdict of a batch.
pub fn verdict_of_all(results: &[CertResult]) -> Verdict {
    if results.iter().any(|r| r.verdict == Verdict::Refuted) {
        Verdict::Refuted
    } else if results.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Certified
    }
}
