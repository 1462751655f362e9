//! Amended potential, Newton solver for frequency-one central
//! configurations, and the polygon and Lagrange generators.

use std::f64::consts::PI;

use carousel_core::{apply_j, Alpha, Vec2};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CcError {
    #[error("bodies {0} and {1} collide (distance {2:e})")]
    Collision(usize, usize, f64),
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Newton system: the configuration looks degenerate")]
    Degenerate,
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A planar central configuration with frequency one:
/// `m_i a_i = sum_j m_i m_j (a_i - a_j) / |a_i - a_j|^(alpha+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralConfiguration {
    pub alpha: Alpha,
    pub masses: Vec<f64>,
    pub positions: Vec<Vec2>,
    pub residual: f64,
}

impl CentralConfiguration {
    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn flat_positions(&self) -> DVector<f64> {
        flatten(&self.positions)
    }

    /// Recomputes the gradient norm of the amended potential.
    pub fn recompute_residual(&self) -> Result<f64, CcError> {
        let e = amended_potential(&self.positions, &self.masses, self.alpha, 1)?;
        Ok(e.gradient.norm())
    }

    pub fn rotated(&self, theta: f64) -> CentralConfiguration {
        let mut out = self.clone();
        for q in &mut out.positions {
            *q = carousel_core::rotate(theta, *q);
        }
        out
    }

    /// `J a` as a flat vector, the rotational zero mode of the Hessian.
    pub fn rotation_generator(&self) -> DVector<f64> {
        flatten(&self.positions.iter().map(|&q| apply_j(q)).collect::<Vec<_>>())
    }
}

/// Value, gradient and (optionally) Hessian of
/// `V(u) = 1/2 sum m |u|^2 + sum_{i<j} m_i m_j phi(|u_i - u_j|)`.
#[derive(Clone, Debug)]
pub struct AmendedPotentialEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: Option<DMatrix<f64>>,
}

pub fn flatten(q: &[Vec2]) -> DVector<f64> {
    DVector::from_iterator(2 * q.len(), q.iter().flat_map(|p| [p[0], p[1]]))
}

pub fn unflatten(u: &DVector<f64>) -> Vec<Vec2> {
    u.as_slice().chunks(2).map(|c| [c[0], c[1]]).collect()
}

fn diameter(q: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            d = d.max(carousel_core::norm2(carousel_core::sub(q[i], q[j])));
        }
    }
    d.sqrt()
}

/// Hessian of `phi(|d|)` with respect to `d`:
/// `-|d|^-(alpha+1) I + (alpha+1) |d|^-(alpha+3) d d^T`.
#[inline]
pub fn pair_hessian(d: Vec2, alpha: Alpha) -> [[f64; 2]; 2] {
    let r2 = carousel_core::norm2(d);
    let w = alpha.pair_weight(r2);
    let w3 = (alpha.value() + 1.0) * w / r2;
    [
        [-w + w3 * d[0] * d[0], w3 * d[0] * d[1]],
        [w3 * d[1] * d[0], -w + w3 * d[1] * d[1]],
    ]
}

/// Amended potential with frequency one, evaluated to the requested order.
pub fn amended_potential(
    q: &[Vec2],
    masses: &[f64],
    alpha: Alpha,
    order: u8,
) -> Result<AmendedPotentialEval, CcError> {
    amended_potential_with_frequency(q, masses, alpha, 1.0, order)
}

/// Same with `1/2 omega_sq sum m |u|^2` as the centrifugal term.
pub fn amended_potential_with_frequency(
    q: &[Vec2],
    masses: &[f64],
    alpha: Alpha,
    omega_sq: f64,
    order: u8,
) -> Result<AmendedPotentialEval, CcError> {
    let k = q.len();
    if masses.len() != k {
        return Err(CcError::Invalid(format!("{} masses for {} positions", masses.len(), k)));
    }
    let tol = 1e-12 * diameter(q).max(f64::MIN_POSITIVE);
    let mut value = 0.0;
    let mut g = DVector::zeros(2 * k);
    let mut h = if order >= 2 { Some(DMatrix::zeros(2 * k, 2 * k)) } else { None };
    for i in 0..k {
        let m = masses[i];
        value += 0.5 * omega_sq * m * (q[i][0] * q[i][0] + q[i][1] * q[i][1]);
        g[2 * i] += omega_sq * m * q[i][0];
        g[2 * i + 1] += omega_sq * m * q[i][1];
        if let Some(h) = h.as_mut() {
            h[(2 * i, 2 * i)] += omega_sq * m;
            h[(2 * i + 1, 2 * i + 1)] += omega_sq * m;
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            let d = carousel_core::sub(q[i], q[j]);
            let r2 = carousel_core::norm2(d);
            let r = r2.sqrt();
            if r <= tol {
                return Err(CcError::Collision(i, j, r));
            }
            let mm = masses[i] * masses[j];
            value += mm * alpha.phi(r);
            let w = mm * alpha.pair_weight(r2);
            for c in 0..2 {
                g[2 * i + c] -= w * d[c];
                g[2 * j + c] += w * d[c];
            }
            if let Some(h) = h.as_mut() {
                let a = pair_hessian(d, alpha);
                for r_ in 0..2 {
                    for c in 0..2 {
                        let v = mm * a[r_][c];
                        h[(2 * i + r_, 2 * i + c)] += v;
                        h[(2 * j + r_, 2 * j + c)] += v;
                        h[(2 * i + r_, 2 * j + c)] -= v;
                        h[(2 * j + r_, 2 * i + c)] -= v;
                    }
                }
            }
        }
    }
    Ok(AmendedPotentialEval { value, gradient: g, hessian: h })
}

/// Orthonormal basis (as columns) of `{v in R^(2k) : sum m_i v_i = 0}`,
/// built from the Householder reflection that maps `m/|m|` to `e_1`.
pub fn reduced_basis(masses: &[f64]) -> DMatrix<f64> {
    let k = masses.len();
    let norm = masses.iter().map(|m| m * m).sum::<f64>().sqrt();
    let mut v: Vec<f64> = masses.iter().map(|m| m / norm).collect();
    v[0] -= 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut b = DMatrix::zeros(2 * k, 2 * k - 2);
    for col in 1..k {
        for row in 0..k {
            let mut hval = if row == col { 1.0 } else { 0.0 };
            if vv > 0.0 {
                hval -= 2.0 * v[row] * v[col] / vv;
            }
            for c in 0..2 {
                b[(2 * row + c, 2 * (col - 1) + c)] = hval;
            }
        }
    }
    b
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 50 }
    }
}

/// Newton iteration on the amended gradient with the center of mass and
/// the rotational phase pinned by bordered linear constraints.
pub fn solve_central_config(
    initial: &[Vec2],
    masses: &[f64],
    alpha: Alpha,
    opts: SolveOptions,
) -> Result<CentralConfiguration, CcError> {
    let k = initial.len();
    if k < 2 || masses.len() != k {
        return Err(CcError::Invalid("need at least two bodies with one mass each".into()));
    }
    let mt: f64 = masses.iter().sum();
    let mut c = [0.0; 2];
    for (q, m) in initial.iter().zip(masses) {
        c[0] += m * q[0] / mt;
        c[1] += m * q[1] / mt;
    }
    let guess: Vec<Vec2> = initial.iter().map(|q| [q[0] - c[0], q[1] - c[1]]).collect();
    let ja = flatten(&guess.iter().map(|&q| apply_j(q)).collect::<Vec<_>>());
    let n = 2 * k;
    let mut cons = DMatrix::zeros(3, n);
    for i in 0..k {
        cons[(0, 2 * i)] = masses[i];
        cons[(1, 2 * i + 1)] = masses[i];
        cons[(2, 2 * i)] = ja[2 * i];
        cons[(2, 2 * i + 1)] = ja[2 * i + 1];
    }
    let mut u = flatten(&guess);
    let mut eval = amended_potential(&unflatten(&u), masses, alpha, 2)?;
    let mut res = eval.gradient.norm();
    for _ in 0..opts.max_iter {
        if res < opts.tol {
            break;
        }
        let h = eval.hessian.take().expect("order 2");
        let mut big = DMatrix::zeros(n + 3, n + 3);
        big.view_mut((0, 0), (n, n)).copy_from(&h);
        big.view_mut((0, n), (n, 3)).copy_from(&cons.transpose());
        big.view_mut((n, 0), (3, n)).copy_from(&cons);
        let mut rhs = DVector::zeros(n + 3);
        rhs.rows_mut(0, n).copy_from(&(-&eval.gradient));
        rhs.rows_mut(n, 3).copy_from(&(-(&cons * &u)));
        let lu = big.lu();
        let sol = lu.solve(&rhs).ok_or(CcError::Degenerate)?;
        if sol.iter().any(|x| !x.is_finite()) {
            return Err(CcError::Degenerate);
        }
        let du = sol.rows(0, n).into_owned();
        // backtracking keeps the iteration away from collisions
        let mut t = 1.0;
        loop {
            let trial = &u + &du * t;
            match amended_potential(&unflatten(&trial), masses, alpha, 2) {
                Ok(e) if e.gradient.norm() < res || t < 1e-3 => {
                    u = trial;
                    eval = e;
                    break;
                }
                Ok(_) => t *= 0.5,
                Err(CcError::Collision(..)) if t >= 1e-3 => t *= 0.5,
                Err(e) => return Err(e),
            }
        }
        res = eval.gradient.norm();
    }
    if res >= opts.tol {
        return Err(CcError::NoConvergence { iterations: opts.max_iter, residual: res });
    }
    Ok(CentralConfiguration { alpha, masses: masses.to_vec(), positions: unflatten(&u), residual: res })
}

/// `s_1 = 2^-alpha sum_{l=1}^{k-1} 1/sin^(alpha-1)(l pi/k)`.
pub fn polygon_s1(k: usize, alpha: Alpha) -> f64 {
    let a = alpha.value();
    let s: f64 = (1..k)
        .map(|l| (l as f64 * PI / k as f64).sin().powf(1.0 - a))
        .sum();
    s * 2f64.powf(-a)
}

/// Regular `k`-gon with unit masses, vertex `l` at angle `l * 2pi/k`,
/// radius `s_1^(1/(alpha+1))`.
pub fn polygon_config(k: usize, alpha: Alpha) -> Result<CentralConfiguration, CcError> {
    polygon_config_with_mass(k, alpha, 1.0)
}

/// Regular polygon with all masses equal to `m`; the radius scales by
/// `m^(1/(alpha+1))`.
pub fn polygon_config_with_mass(k: usize, alpha: Alpha, m: f64) -> Result<CentralConfiguration, CcError> {
    if k < 2 {
        return Err(CcError::Invalid(format!("polygon needs k >= 2, got {k}")));
    }
    if !(m > 0.0) {
        return Err(CcError::Invalid(format!("mass must be positive, got {m}")));
    }
    let rho = (m * polygon_s1(k, alpha)).powf(1.0 / (alpha.value() + 1.0));
    let zeta = 2.0 * PI / k as f64;
    let positions = (1..=k)
        .map(|l| {
            let (s, c) = (l as f64 * zeta).sin_cos();
            [rho * c, rho * s]
        })
        .collect::<Vec<_>>();
    let masses = vec![m; k];
    let residual = amended_potential(&positions, &masses, alpha, 1)?.gradient.norm();
    Ok(CentralConfiguration { alpha, masses, positions, residual })
}

/// Equilateral triangle with side `(m1+m2+m3)^(1/(alpha+1))`, centered.
pub fn lagrange_config(m1: f64, m2: f64, m3: f64, alpha: Alpha) -> Result<CentralConfiguration, CcError> {
    let masses = vec![m1, m2, m3];
    if masses.iter().any(|m| !(*m > 0.0)) {
        return Err(CcError::Invalid("masses must be positive".into()));
    }
    let mt = m1 + m2 + m3;
    let s = mt.powf(1.0 / (alpha.value() + 1.0));
    let raw = [[0.0, 0.0], [s, 0.0], [0.5 * s, 0.5 * 3f64.sqrt() * s]];
    let mut c = [0.0; 2];
    for (q, m) in raw.iter().zip(&masses) {
        c[0] += m * q[0] / mt;
        c[1] += m * q[1] / mt;
    }
    let positions: Vec<Vec2> = raw.iter().map(|q| [q[0] - c[0], q[1] - c[1]]).collect();
    let residual = amended_potential(&positions, &masses, alpha, 1)?.gradient.norm();
    Ok(CentralConfiguration { alpha, masses, positions, residual })
}

/// Binary with masses `m1, m2` at unit separation scaled to frequency one:
/// separation `(m1+m2)^(1/(alpha+1))`.
pub fn binary_config(m1: f64, m2: f64, alpha: Alpha) -> Result<CentralConfiguration, CcError> {
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(CcError::Invalid("masses must be positive".into()));
    }
    let mt = m1 + m2;
    let d = mt.powf(1.0 / (alpha.value() + 1.0));
    let positions = vec![[m2 / mt * d, 0.0], [-m1 / mt * d, 0.0]];
    let masses = vec![m1, m2];
    let residual = amended_potential(&positions, &masses, alpha, 1)?.gradient.norm();
    Ok(CentralConfiguration { alpha, masses, positions, residual })
}

/// `beta = 27 (m1 m2 + m1 m3 + m2 m3) / (m1 + m2 + m3)^2`.
pub fn mass_beta(m1: f64, m2: f64, m3: f64) -> f64 {
    let s = m1 + m2 + m3;
    27.0 * (m1 * m2 + m1 * m3 + m2 * m3) / (s * s)
}
