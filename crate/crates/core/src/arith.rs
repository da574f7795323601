//! Exact arithmetic helpers.
//!
//! Every quantity in the library is an exact rational. Hot loops are written
//! against [`Scalar`] so they can run on checked `i128` first and fall back to
//! [`Rational`] when a value stops fitting; both paths give identical results.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn qu(v: usize) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `p/q`, a plain integer, or a finite decimal such as `0.45` into an
/// exact rational.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("malformed decimal {s:?}"));
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("malformed decimal {s:?}"));
        }
        let digits = format!("{int_digits}{frac_part}");
        let mut num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|e| format!("malformed decimal {s:?}: {e}"))?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        return Ok(Rational::new(num, den));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| format!("malformed rational {s:?}: {e}"))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| format!("malformed rational {s:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(n, d));
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|e| format!("malformed rational {s:?}: {e}"))
}

pub fn floor_usize(x: &Rational) -> usize {
    if x.is_negative() {
        return 0;
    }
    x.floor().to_integer().to_usize().unwrap_or(usize::MAX)
}

pub fn ceil_usize(x: &Rational) -> usize {
    if x.is_negative() {
        return 0;
    }
    x.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Ring elements used by the transform and evaluation kernels.
///
/// `add`/`mul` return `None` on overflow so a caller can retry on a wider type.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn from_rational(q: &Rational) -> Option<Self>;
    fn to_rational(&self) -> Rational;

    fn mul_add(&self, a: &Self, b: &Self) -> Option<Self> {
        self.add(&a.mul(b)?)
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn from_rational(q: &Rational) -> Option<Self> {
        Some(q.clone())
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

impl Scalar for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn from_rational(q: &Rational) -> Option<Self> {
        if q.is_integer() {
            q.to_integer().to_i128()
        } else {
            None
        }
    }
    fn to_rational(&self) -> Rational {
        Rational::from_integer(BigInt::from(*self))
    }
}

/// Exact comparison `lo <= value <= hi` where `value` is an integer.
pub fn int_in_closed(value: usize, lo: &Rational, hi: &Rational) -> bool {
    let v = qu(value);
    lo <= &v && &v <= hi
}

pub(crate) fn require_positive(name: &str, x: &Rational) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive, got {x}")))
    }
}
