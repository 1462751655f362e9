//! Outward-rounded interval arithmetic over `f64`, plus a double-double
//! variant for tighter enclosures.
//!
//! Every operation computes endpoints in round-to-nearest and then moves
//! them one ulp outward, which yields a valid enclosure without touching
//! the FPU rounding mode.

pub mod dd;

use std::f64::consts::PI as PI_F64;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use dd::{Dd, DdInterval};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero: [{0}, {1}]")]
    DivisionByZero(f64, f64),
    #[error("square root of an interval with negative part: [{0}, {1}]")]
    NegativeSqrt(f64, f64),
    #[error("invalid interval bounds [{0}, {1}]")]
    InvalidBounds(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn up(x: f64) -> f64 {
    x.next_up()
}

/// Enclosure of pi.
pub const PI: Interval = Interval { lo: PI_F64, hi: 3.1415926535897936 };

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(IntervalError::InvalidBounds(lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval; exact because `x` is representable.
    pub const fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    /// Smallest interval containing both bounds after one-ulp inflation.
    pub fn around(x: f64) -> Interval {
        Interval { lo: down(x), hi: up(x) }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// True iff the interval lies strictly on one side of zero.
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }

    /// Smallest absolute value over the interval.
    pub fn mig(&self) -> f64 {
        if self.excludes_zero() {
            self.lo.abs().min(self.hi.abs())
        } else {
            0.0
        }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval { lo: 0.0, hi: (-self.lo).max(self.hi) }
        }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval { lo: down(a.lo * a.lo).max(0.0), hi: up(a.hi * a.hi) }
    }

    pub fn recip(&self) -> Result<Interval, IntervalError> {
        if !self.excludes_zero() {
            return Err(IntervalError::DivisionByZero(self.lo, self.hi));
        }
        Ok(Interval { lo: down(1.0 / self.hi), hi: up(1.0 / self.lo) })
    }

    pub fn checked_div(&self, b: &Interval) -> Result<Interval, IntervalError> {
        if !b.excludes_zero() {
            return Err(IntervalError::DivisionByZero(b.lo, b.hi));
        }
        let c = [self.lo / b.lo, self.lo / b.hi, self.hi / b.lo, self.hi / b.hi];
        Ok(Interval { lo: down(min4(c)), hi: up(max4(c)) })
    }

    /// Product of two intervals known to be non-negative.
    #[inline]
    pub fn mul_nonneg(&self, b: &Interval) -> Interval {
        Interval { lo: down(self.lo * b.lo).max(0.0), hi: up(self.hi * b.hi) }
    }

    /// Scaling by an exact power of two is exact.
    pub fn scale_pow2(&self, e: i32) -> Interval {
        let f = 2f64.powi(e);
        Interval { lo: self.lo * f, hi: self.hi * f }
    }
}

fn min4(c: [f64; 4]) -> f64 {
    c[0].min(c[1]).min(c[2].min(c[3]))
}

fn max4(c: [f64; 4]) -> f64 {
    c[0].max(c[1]).max(c[2].max(c[3]))
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, b: Interval) -> Interval {
        Interval { lo: down(self.lo + b.lo), hi: up(self.hi + b.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, b: Interval) -> Interval {
        Interval { lo: down(self.lo - b.hi), hi: up(self.hi - b.lo) }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, b: Interval) -> Interval {
        let c = [self.lo * b.lo, self.lo * b.hi, self.hi * b.lo, self.hi * b.hi];
        Interval { lo: down(min4(c)), hi: up(max4(c)) }
    }
}

pub fn iadd(a: Interval, b: Interval) -> Interval {
    a + b
}

pub fn isub(a: Interval, b: Interval) -> Interval {
    a - b
}

pub fn imul(a: Interval, b: Interval) -> Interval {
    a * b
}

pub fn idiv(a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    a.checked_div(&b)
}

pub fn isqrt(a: Interval) -> Result<Interval, IntervalError> {
    if a.lo < 0.0 {
        return Err(IntervalError::NegativeSqrt(a.lo, a.hi));
    }
    // sqrt is correctly rounded, so one ulp each way is enough
    Ok(Interval { lo: down(a.lo.sqrt()).max(0.0), hi: up(a.hi.sqrt()) })
}

pub fn ipow(a: Interval, e: i32) -> Result<Interval, IntervalError> {
    if e == 0 {
        return Ok(Interval::point(1.0));
    }
    if e < 0 {
        return ipow(a, -e)?.recip();
    }
    let pow_nonneg = |x: Interval| {
        let mut acc = Interval::point(1.0);
        for _ in 0..e {
            acc = acc.mul_nonneg(&x);
        }
        acc
    };
    if e % 2 == 0 {
        return Ok(pow_nonneg(a.abs()));
    }
    // odd powers are monotone; evaluate each endpoint separately
    let end = |x: f64, lower: bool| {
        let p = pow_nonneg(Interval::point(x.abs()));
        match (x < 0.0, lower) {
            (false, true) => p.lo,
            (false, false) => p.hi,
            (true, true) => -p.hi,
            (true, false) => -p.lo,
        }
    };
    Ok(Interval { lo: end(a.lo, true), hi: end(a.hi, false) })
}

/// Relative error allowance for the platform `sin`, in ulps.
const SIN_ULPS: f64 = 4.0;

fn sin_bounds(x: f64) -> (f64, f64) {
    let y = x.sin();
    let slack = SIN_ULPS * f64::EPSILON * y.abs() + f64::MIN_POSITIVE;
    ((y - slack).max(-1.0), (y + slack).min(1.0))
}

/// Enclosure of `sin` over an interval: endpoint values plus any interior
/// extremum `pi/2 + n pi` whose enclosure meets the argument.
pub fn isin(a: Interval) -> Interval {
    if a.width() >= 2.0 * PI_F64 {
        return Interval { lo: -1.0, hi: 1.0 };
    }
    let (l0, h0) = sin_bounds(a.lo);
    let (l1, h1) = sin_bounds(a.hi);
    let mut lo = l0.min(l1);
    let mut hi = h0.max(h1);
    let n_lo = (a.lo / PI_F64 - 0.5).floor() as i64 - 1;
    let n_hi = (a.hi / PI_F64 - 0.5).ceil() as i64 + 1;
    for n in n_lo..=n_hi {
        let c = PI * Interval::point(n as f64 + 0.5);
        if c.intersects(&a) {
            if n.rem_euclid(2) == 0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
        }
    }
    Interval { lo, hi }
}

/// Arithmetic needed to enclose the polygon determinants, implemented by
/// both the `f64` and the double-double interval types.
pub trait Enclosure:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Send + Sync
{
    fn point(x: f64) -> Self;
    /// Enclosure of `sin(x pi / k)`.
    fn sin_pi_frac(x: u64, k: u64) -> Self;
    fn recip(&self) -> Result<Self, IntervalError>;
    fn sqr(&self) -> Self;
    fn mul_nonneg(&self, b: &Self) -> Self {
        *self * *b
    }
    fn scale_pow2(&self, e: i32) -> Self;
    /// Endpoints rounded outward to `f64`.
    fn bounds(&self) -> (f64, f64);
    fn excludes_zero(&self) -> bool;
    fn width(&self) -> f64 {
        let (l, h) = self.bounds();
        h - l
    }
    fn mig(&self) -> f64 {
        let (l, h) = self.bounds();
        if l > 0.0 || h < 0.0 {
            l.abs().min(h.abs())
        } else {
            0.0
        }
    }
}

impl Enclosure for Interval {
    fn point(x: f64) -> Self {
        Interval::point(x)
    }

    fn sin_pi_frac(x: u64, k: u64) -> Self {
        if x % k == 0 {
            return Interval::point(0.0);
        }
        let arg = PI * Interval::point(x as f64);
        let arg = arg.checked_div(&Interval::point(k as f64)).expect("k > 0");
        isin(arg)
    }

    fn recip(&self) -> Result<Self, IntervalError> {
        Interval::recip(self)
    }

    fn sqr(&self) -> Self {
        Interval::sqr(self)
    }

    #[inline]
    fn mul_nonneg(&self, b: &Self) -> Self {
        Interval::mul_nonneg(self, b)
    }

    fn scale_pow2(&self, e: i32) -> Self {
        Interval::scale_pow2(self, e)
    }

    fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn excludes_zero(&self) -> bool {
        Interval::excludes_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((Interval::point(1.0) + Interval::point(2.0)).contains(3.0));
        let p = Interval::new(-1.0, 2.0).unwrap() * Interval::new(-3.0, 1.0).unwrap();
        assert!(p.contains(-6.0) && p.contains(3.0));
        assert!(p.lo() >= -6.0 - 1e-14 && p.hi() <= 3.0 + 1e-14);
        let q = idiv(Interval::new(1.0, 2.0).unwrap(), Interval::point(4.0)).unwrap();
        assert!(q.contains(0.25) && q.contains(0.5));
        assert!(idiv(Interval::point(1.0), Interval::new(-1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn pi_enclosure() {
        assert!(PI.lo() < PI.hi());
        assert_eq!(PI.hi(), PI_F64.next_up());
    }

    #[test]
    fn sin_examples() {
        let half = PI.scale_pow2(-1);
        let s = isin(half);
        assert!(s.contains(1.0));
        let s = isin(Interval::new(0.0, PI_F64).unwrap());
        assert!(s.contains(0.0) && s.contains(1.0));
        assert!(s.lo() <= 0.0 && s.hi() >= 1.0);
        let s = isin(Interval::new(4.0, 5.0).unwrap());
        assert!(s.contains(-1.0));
    }

    #[test]
    fn sqrt_and_pow() {
        let r = isqrt(Interval::new(4.0, 9.0).unwrap()).unwrap();
        assert!(r.contains(2.0) && r.contains(3.0));
        assert!(isqrt(Interval::new(-1.0, 1.0).unwrap()).is_err());
        let c = ipow(Interval::new(-1.0, 2.0).unwrap(), 3).unwrap();
        assert!(c.contains(-1.0) && c.contains(8.0) && c.lo() > -1.1);
        let s = ipow(Interval::new(-3.0, 2.0).unwrap(), 2).unwrap();
        assert!(s.contains(0.0) && s.contains(9.0) && s.lo() >= 0.0);
        let r = ipow(Interval::point(2.0), -2).unwrap();
        assert!(r.contains(0.25));
    }

    #[test]
    fn zero_exclusion() {
        assert!(Interval::new(0.1, 0.2).unwrap().excludes_zero());
        assert!(!Interval::new(-1.0, 1.0).unwrap().excludes_zero());
    }
}
