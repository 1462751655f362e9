//! Double-double numbers and intervals.
//!
//! The basic operations follow the error-free transformation algorithms of
//! Joldes, Muller and Popescu (2017): addition has relative error at most
//! `3u^2`, multiplication `4u^2` and division `15u^2 + 56u^3` with
//! `u = 2^-53`. Interval endpoints are widened by `2^-96` relative, which is
//! more than 500 times any of those bounds.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{Enclosure, IntervalError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// pi as an unevaluated sum; the tail error is below `1e-32`.
pub const DD_PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn cmp_total(&self, o: &Dd) -> Ordering {
        let d = *self - *o;
        if d.hi > 0.0 || (d.hi == 0.0 && d.lo > 0.0) {
            Ordering::Greater
        } else if d.hi < 0.0 || (d.hi == 0.0 && d.lo < 0.0) {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    fn min(self, o: Dd) -> Dd {
        if self.cmp_total(&o) == Ordering::Greater { o } else { self }
    }

    fn max(self, o: Dd) -> Dd {
        if self.cmp_total(&o) == Ordering::Less { o } else { self }
    }

    /// Moves the value by `2^-96` relative plus a tiny absolute amount.
    fn nudge(self, upward: bool) -> Dd {
        let mag = self.hi.abs() * WIDEN + 1e-300;
        self + Dd::from_f64(if upward { mag } else { -mag })
    }
}

const WIDEN: f64 = 1.262177448353619e-29; // 2^-96

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, y: Dd) -> Dd {
        let (sh, sl) = two_sum(self.hi, y.hi);
        let (th, tl) = two_sum(self.lo, y.lo);
        let c = sl + th;
        let (vh, vl) = fast_two_sum(sh, c);
        let w = tl + vl;
        let (hi, lo) = fast_two_sum(vh, w);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, y: Dd) -> Dd {
        self + (-y)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, y: Dd) -> Dd {
        let (ch, cl1) = two_prod(self.hi, y.hi);
        let tl0 = self.lo * y.lo;
        let tl1 = self.hi.mul_add(y.lo, tl0);
        let cl2 = self.lo.mul_add(y.hi, tl1);
        let cl3 = cl1 + cl2;
        let (hi, lo) = fast_two_sum(ch, cl3);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, y: Dd) -> Dd {
        let th = self.hi / y.hi;
        let (ph, pl) = two_prod(y.hi, th);
        let pl = y.lo.mul_add(th, pl);
        let (rh, rl) = fast_two_sum(ph, pl);
        let d = self - Dd { hi: rh, lo: rl };
        let tl = (d.hi + d.lo) / y.hi;
        let (hi, lo) = fast_two_sum(th, tl);
        Dd { hi, lo }
    }
}

/// Interval with double-double endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DdInterval {
    pub lo: Dd,
    pub hi: Dd,
}

impl DdInterval {
    pub fn point(x: Dd) -> DdInterval {
        DdInterval { lo: x, hi: x }
    }

    fn widened(lo: Dd, hi: Dd) -> DdInterval {
        DdInterval { lo: lo.nudge(false), hi: hi.nudge(true) }
    }

    fn is_nonneg(&self) -> bool {
        self.lo.hi > 0.0 || (self.lo.hi == 0.0 && self.lo.lo >= 0.0)
    }

    fn is_nonpos(&self) -> bool {
        self.hi.hi < 0.0 || (self.hi.hi == 0.0 && self.hi.lo <= 0.0)
    }

    pub fn excludes_zero(&self) -> bool {
        (self.lo.hi > 0.0 || (self.lo.hi == 0.0 && self.lo.lo > 0.0))
            || (self.hi.hi < 0.0 || (self.hi.hi == 0.0 && self.hi.lo < 0.0))
    }

    fn abs(&self) -> DdInterval {
        if self.is_nonneg() {
            *self
        } else if self.is_nonpos() {
            DdInterval { lo: -self.hi, hi: -self.lo }
        } else {
            DdInterval { lo: Dd::ZERO, hi: (-self.lo).max(self.hi) }
        }
    }
}

impl Add for DdInterval {
    type Output = DdInterval;
    fn add(self, b: DdInterval) -> DdInterval {
        DdInterval::widened(self.lo + b.lo, self.hi + b.hi)
    }
}

impl Sub for DdInterval {
    type Output = DdInterval;
    fn sub(self, b: DdInterval) -> DdInterval {
        DdInterval::widened(self.lo - b.hi, self.hi - b.lo)
    }
}

impl Mul for DdInterval {
    type Output = DdInterval;
    fn mul(self, b: DdInterval) -> DdInterval {
        let c = [self.lo * b.lo, self.lo * b.hi, self.hi * b.lo, self.hi * b.hi];
        let lo = c[0].min(c[1]).min(c[2].min(c[3]));
        let hi = c[0].max(c[1]).max(c[2].max(c[3]));
        DdInterval::widened(lo, hi)
    }
}

/// Taylor series of `sin` on `[0, pi/2]` in double-double, with the
/// truncation remainder bounded by the first omitted term.
fn dd_sin_small(theta: Dd) -> (Dd, f64) {
    let t2 = theta * theta;
    let mut term = theta;
    let mut sum = theta;
    let mut n = 1.0;
    loop {
        term = term * t2 / Dd::from_f64(-(n + 1.0) * (n + 2.0));
        n += 2.0;
        sum = sum + term;
        if term.hi.abs() < 1e-40 {
            break;
        }
    }
    (sum, term.hi.abs() * 2.0)
}

impl Enclosure for DdInterval {
    fn point(x: f64) -> Self {
        DdInterval::point(Dd::from_f64(x))
    }

    fn sin_pi_frac(x: u64, k: u64) -> Self {
        let y = x % (2 * k);
        let (y, neg) = if y >= k { (y - k, true) } else { (y, false) };
        if y == 0 {
            return DdInterval::point(Dd::ZERO);
        }
        let y = y.min(k - y);
        // theta in (0, pi/2]; its error from the pi tail and two roundings is
        // below 1e-31, and sin is 1-Lipschitz
        let theta = DD_PI * Dd::from_f64(y as f64) / Dd::from_f64(k as f64);
        let (s, rem) = dd_sin_small(theta);
        // about 25 accumulation steps of relative error 3u^2 on partial sums below 2
        let slack = rem + 1e-29;
        let lo = (s - Dd::from_f64(slack)).min(Dd::ONE);
        let hi = (s + Dd::from_f64(slack)).min(Dd::ONE);
        let out = DdInterval { lo, hi };
        if neg {
            DdInterval { lo: -out.hi, hi: -out.lo }
        } else {
            out
        }
    }

    fn recip(&self) -> Result<Self, IntervalError> {
        if !self.excludes_zero() {
            let (l, h) = self.bounds();
            return Err(IntervalError::DivisionByZero(l, h));
        }
        Ok(DdInterval::widened(self.hi.recip(), self.lo.recip()))
    }

    fn sqr(&self) -> Self {
        let a = self.abs();
        let lo = (a.lo * a.lo).nudge(false);
        let lo = if lo.hi < 0.0 { Dd::ZERO } else { lo };
        DdInterval { lo, hi: (a.hi * a.hi).nudge(true) }
    }

    fn mul_nonneg(&self, b: &Self) -> Self {
        DdInterval::widened(self.lo * b.lo, self.hi * b.hi)
    }

    fn scale_pow2(&self, e: i32) -> Self {
        let f = Dd::from_f64(2f64.powi(e));
        DdInterval { lo: self.lo * f, hi: self.hi * f }
    }

    fn bounds(&self) -> (f64, f64) {
        // to_f64 rounds to nearest; step once outward to stay rigorous
        (self.lo.to_f64().next_down(), self.hi.to_f64().next_up())
    }

    fn excludes_zero(&self) -> bool {
        DdInterval::excludes_zero(self)
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo).to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_add_mul_exactness() {
        let a = Dd::from_f64(1.0) + Dd::from_f64(1e-20);
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        let third = Dd::ONE / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn dd_sin_matches_known_values() {
        let s = DdInterval::sin_pi_frac(1, 6);
        assert!(s.lo.cmp_total(&Dd::from_f64(0.5)) != Ordering::Greater);
        assert!(s.hi.cmp_total(&Dd::from_f64(0.5)) != Ordering::Less);
        assert!(s.width() < 1e-27);
        let s = DdInterval::sin_pi_frac(7, 6);
        assert!(s.bounds().0 <= -0.5 && s.bounds().1 >= -0.5);
        let s = DdInterval::sin_pi_frac(1, 2);
        assert!(s.bounds().1 >= 1.0);
    }

    #[test]
    fn dd_sin_agrees_with_f64() {
        for k in [3u64, 7, 100, 997] {
            for x in 0..2 * k {
                let s = DdInterval::sin_pi_frac(x, k);
                let f = (x as f64 * std::f64::consts::PI / k as f64).sin();
                let (l, h) = s.bounds();
                assert!(l - 2e-15 <= f && f <= h + 2e-15, "k={k} x={x}");
            }
        }
    }
}
