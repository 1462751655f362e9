use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use crate::CoreError;

/// Exponent of the homogeneous force law, `|F| ~ r^-alpha`.
///
/// The exact rational value is kept when it is known (parsed from `"3/2"`,
/// `"1.05"`, `"log"`, ...) so that integrality tests such as
/// `p * sqrt(3 - alpha)` can be decided without rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alpha {
    value: f64,
    exact: Option<(i64, i64)>,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Alpha {
    pub const LOG: Alpha = Alpha { value: 1.0, exact: Some((1, 1)) };
    pub const NEWTON: Alpha = Alpha { value: 2.0, exact: Some((2, 1)) };

    /// Builds an exponent from a float. Dyadic values with small
    /// denominators (1.5, 2.25, ...) are exact in binary and keep their
    /// rational form; anything else is treated as inexact.
    pub fn new(value: f64) -> Result<Alpha, CoreError> {
        if !value.is_finite() || value < 1.0 {
            return Err(CoreError::InvalidAlpha(format!("{value}")));
        }
        let mut exact = None;
        for shift in 0..=10 {
            let den = 1i64 << shift;
            let scaled = value * den as f64;
            if scaled == scaled.round() && scaled.abs() < 1e15 {
                exact = Some(reduce(scaled as i64, den));
                break;
            }
        }
        Ok(Alpha { value, exact })
    }

    pub fn rational(num: i64, den: i64) -> Result<Alpha, CoreError> {
        if den <= 0 || num < den {
            return Err(CoreError::InvalidAlpha(format!("{num}/{den}")));
        }
        let (n, d) = reduce(num, den);
        Ok(Alpha { value: n as f64 / d as f64, exact: Some((n, d)) })
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    /// `(num, den)` in lowest terms, when the exponent is known exactly.
    pub fn exact(&self) -> Option<(i64, i64)> {
        self.exact
    }

    pub fn is_logarithmic(&self) -> bool {
        self.value == 1.0
    }

    pub fn is_gravitational(&self) -> bool {
        self.value == 2.0
    }

    /// Potential `phi_alpha(r)`, with `phi'(r) = -r^-alpha` and `phi(inf) = 0`
    /// for alpha > 1; `-ln r` for alpha = 1. No domain check.
    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        if self.is_logarithmic() {
            -r.ln()
        } else if self.is_gravitational() {
            1.0 / r
        } else {
            r.powf(1.0 - self.value) / (self.value - 1.0)
        }
    }

    #[inline]
    pub fn dphi(&self, r: f64) -> f64 {
        -self.pow_neg(r, self.value)
    }

    /// `r^-(alpha+1)` from the squared distance; the hot path of every pair loop.
    #[inline]
    pub fn pair_weight(&self, r2: f64) -> f64 {
        if self.is_logarithmic() {
            1.0 / r2
        } else if self.is_gravitational() {
            1.0 / (r2 * r2.sqrt())
        } else {
            r2.powf(-0.5 * (self.value + 1.0))
        }
    }

    #[inline]
    fn pow_neg(&self, r: f64, e: f64) -> f64 {
        if e == 1.0 {
            1.0 / r
        } else if e == 2.0 {
            1.0 / (r * r)
        } else {
            r.powf(-e)
        }
    }
}

fn reduce(num: i64, den: i64) -> (i64, i64) {
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some((n, 1)) => write!(f, "{n}"),
            Some((n, d)) => write!(f, "{n}/{d}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for Alpha {
    type Err = CoreError;

    /// Accepts `log`, `newton`, `num/den`, integers and plain decimals.
    /// Decimals are read as exact base-ten fractions: `"1.05"` is `21/20`.
    fn from_str(s: &str) -> Result<Alpha, CoreError> {
        let s = s.trim();
        let bad = || CoreError::InvalidAlpha(s.to_string());
        match s.to_ascii_lowercase().as_str() {
            "log" | "logarithmic" => return Ok(Alpha::LOG),
            "newton" | "newtonian" | "grav" => return Ok(Alpha::NEWTON),
            _ => {}
        }
        if let Some((a, b)) = s.split_once('/') {
            let num: i64 = a.trim().parse().map_err(|_| bad())?;
            let den: i64 = b.trim().parse().map_err(|_| bad())?;
            return Alpha::rational(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits_ok = !frac.is_empty()
                && frac.len() <= 12
                && frac.bytes().all(|c| c.is_ascii_digit())
                && int.bytes().all(|c| c.is_ascii_digit());
            if digits_ok {
                let den = 10i64.pow(frac.len() as u32);
                let int_part: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
                let frac_part: i64 = frac.parse().map_err(|_| bad())?;
                return Alpha::rational(int_part * den + frac_part, den);
            }
        }
        if let Ok(n) = s.parse::<i64>() {
            return Alpha::rational(n, 1);
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        Alpha::new(v)
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_f64(self.value)
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Alpha, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Alpha::new(v).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tags_and_fractions() {
        assert_eq!("log".parse::<Alpha>().unwrap(), Alpha::LOG);
        assert_eq!("newton".parse::<Alpha>().unwrap().exact(), Some((2, 1)));
        assert_eq!("3/2".parse::<Alpha>().unwrap().exact(), Some((3, 2)));
        assert_eq!("1.05".parse::<Alpha>().unwrap().exact(), Some((21, 20)));
        assert_eq!("6/4".parse::<Alpha>().unwrap().exact(), Some((3, 2)));
        assert!("0.5".parse::<Alpha>().is_err());
        assert!("abc".parse::<Alpha>().is_err());
    }

    #[test]
    fn dyadic_floats_are_exact() {
        assert_eq!(Alpha::new(1.5).unwrap().exact(), Some((3, 2)));
        assert_eq!(Alpha::new(1.05).unwrap().exact(), None);
    }

    #[test]
    fn flags() {
        assert!(Alpha::LOG.is_logarithmic());
        assert!(Alpha::NEWTON.is_gravitational());
        assert!(!Alpha::new(1.5).unwrap().is_gravitational());
    }

    #[test]
    fn pair_weight_matches_pow() {
        for a in [1.0, 1.5, 2.0, 2.5, 3.0] {
            let al = Alpha::new(a).unwrap();
            let r: f64 = 1.7;
            let w = al.pair_weight(r * r);
            assert!((w - r.powf(-(a + 1.0))).abs() < 1e-15);
        }
    }
}
