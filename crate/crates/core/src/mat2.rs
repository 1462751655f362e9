use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

use crate::Vec2;

/// Complex 2x2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2C(pub [[Complex64; 2]; 2]);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl Mat2C {
    pub fn zero() -> Mat2C {
        Mat2C([[ZERO; 2]; 2])
    }

    pub fn identity() -> Mat2C {
        Mat2C([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Rotation generator `J = [[0,-1],[1,0]]`.
    pub fn j() -> Mat2C {
        Mat2C([[ZERO, -ONE], [ONE, ZERO]])
    }

    /// Reflection `R = diag(1,-1)`.
    pub fn r() -> Mat2C {
        Mat2C([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// `iJ`, Hermitian.
    pub fn ij() -> Mat2C {
        Mat2C::j().scale(I)
    }

    pub fn from_real(a: [[f64; 2]; 2]) -> Mat2C {
        Mat2C([
            [Complex64::new(a[0][0], 0.0), Complex64::new(a[0][1], 0.0)],
            [Complex64::new(a[1][0], 0.0), Complex64::new(a[1][1], 0.0)],
        ])
    }

    pub fn scale(&self, s: Complex64) -> Mat2C {
        let a = &self.0;
        Mat2C([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn scale_re(&self, s: f64) -> Mat2C {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn det(&self) -> Complex64 {
        let a = &self.0;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn adjoint(&self) -> Mat2C {
        let a = &self.0;
        Mat2C([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2C) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                m = m.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1];
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mid - rad, mid + rad]
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += o.0[r][c];
            }
        }
        out
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] -= o.0[r][c];
            }
        }
        out
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        let a = &self.0;
        let b = &o.0;
        let mut out = Mat2C::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }
}

/// `exp(theta J) v`.
#[inline]
pub fn rotate(theta: f64, v: Vec2) -> Vec2 {
    let (s, c) = theta.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Rotation by a precomputed `(sin, cos)` pair.
#[inline]
pub fn rotate_sc(sc: (f64, f64), v: Vec2) -> Vec2 {
    let (s, c) = sc;
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// `J v`.
#[inline]
pub fn apply_j(v: Vec2) -> Vec2 {
    [-v[1], v[0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_relations() {
        let j = Mat2C::j();
        let r = Mat2C::r();
        let id = Mat2C::identity();
        assert_eq!(j * j, id.scale_re(-1.0));
        assert_eq!(r * r, id);
        assert_eq!(j * r, (r * j).scale_re(-1.0));
        assert!(Mat2C::ij().is_hermitian(0.0));
    }

    #[test]
    fn eigenvalues_of_ij() {
        let e = Mat2C::ij().hermitian_eigenvalues();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_quarter_turn() {
        let v = rotate(std::f64::consts::FRAC_PI_2, [1.0, 0.0]);
        assert!(v[0].abs() < 1e-16 && (v[1] - 1.0).abs() < 1e-16);
        assert_eq!(apply_j([1.0, 0.0]), [0.0, 1.0]);
    }
}
