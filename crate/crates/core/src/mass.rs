//! Probability-mass scalars.
//!
//! Every algorithm that compares or accumulates masses is generic over
//! [`Mass`], so the same code runs in exact rational arithmetic
//! ([`BigRational`]) or in `f64`. Quantities that are irrational by nature
//! (logarithms, `e^{-nγ}`, square roots) are always evaluated in `f64`.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Absolute slack used when a floating-point quantity is compared against a
/// floating-point target (`mass >= 1 - δ`, `tail <= ε`, `f(F) <= Δ`).
///
/// Targets like `1 - f^{-1}(Δ)` are irrational, so ties can only be decided up
/// to rounding; every module goes through [`reaches`] / [`within`] so both
/// sides of an identity see the same rule.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `value >= target`, up to [`TIE_TOLERANCE`].
#[inline]
pub fn reaches(value: f64, target: f64) -> bool {
    value >= target - TIE_TOLERANCE
}

/// `value <= limit`, up to [`TIE_TOLERANCE`].
#[inline]
pub fn within(value: f64, limit: f64) -> bool {
    value <= limit + TIE_TOLERANCE
}

pub trait Mass: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// True for exact arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn from_count(k: u64) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;

    fn cmp_mass(&self, other: &Self) -> Ordering;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;

    fn to_f64(&self) -> f64;
    /// Natural log, accurate even when the value underflows `f64`.
    fn ln(&self) -> f64;

    fn sum<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc.add(x))
    }

    fn max_of(&self, other: &Self) -> Self {
        if self.cmp_mass(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }
}

impl Mass for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn from_count(k: u64) -> Self {
        k as f64
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn cmp_mass(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
}

impl Mass for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_count(k: u64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn cmp_mass(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn ln(&self) -> f64 {
        if Zero::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        if Signed::is_negative(self) {
            return f64::NAN;
        }
        ln_bigint(self.numer()) - ln_bigint(self.denom())
    }
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 960 {
        x.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
        top.ln() + shift as f64 * LN_2
    }
}

/// Correctly scaled conversion that survives numerators and denominators far
/// outside the `f64` range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = num_traits::ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || Zero::is_zero(r)) {
            return v;
        }
    }
    let sign = if Signed::is_negative(r) { -1.0 } else { 1.0 };
    sign * (ln_bigint(&r.numer().abs()) - ln_bigint(&r.denom().abs())).exp()
}

/// Parses `3/4`, `0.25`, `1` or `-2.5e-3` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::InvalidModel(format!("cannot parse `{s}` as a number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigRational = parse_rational(num)?;
        let den: BigRational = parse_rational(den)?;
        if Zero::is_zero(&den) {
            return Err(Error::InvalidModel(format!("zero denominator in `{s}`")));
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational(" 1 ").unwrap(), q(1, 1));
        assert_eq!(parse_rational("-2.5e-3").unwrap(), q(-1, 400));
        assert_eq!(parse_rational("1/0.5").unwrap(), q(2, 1));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn ln_of_tiny_rational_does_not_underflow() {
        let tiny = BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(2), 3000));
        let expected = -3000.0 * LN_2;
        assert!((Mass::ln(&tiny) - expected).abs() < 1e-9);
        assert_eq!(Mass::to_f64(&tiny), 0.0);
    }

    #[test]
    fn tolerance_helpers() {
        assert!(reaches(0.75, 1.0 - 0.25));
        assert!(!reaches(0.7, 0.75));
        assert!(within(0.0625, 0.0625));
        assert!(!within(0.07, 0.0625));
    }
}
