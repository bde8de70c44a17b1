//! Numeric backends shared by every engine in the crate.
//!
//! Two backends implement [`Scalar`]: `f64` for speed and [`Exact`] (an
//! arbitrary-precision rational) for drift-free reference runs.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational probability in canonical form (gcd 1, positive denominator).
pub type Exact = BigRational;

/// Absolute tolerance on CPT row sums in float mode.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Below this a float normalizer is treated as zero.
pub const ZERO_MASS_THRESHOLD: f64 = 1e-12;

pub trait Scalar:
    Clone
    + PartialOrd
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: u64, den: u64) -> Self;
    fn from_exact(value: &Exact) -> Self;
    fn as_f64(&self) -> f64;
    fn is_null(&self) -> bool;

    /// Whether a CPT row sum counts as normalized.
    fn is_unit_sum(&self) -> bool;

    /// Whether a mass is small enough to be treated as zero.
    fn is_negligible(&self) -> bool;

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_exact(value: &Exact) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn is_null(&self) -> bool {
        *self == 0.0
    }

    fn is_unit_sum(&self) -> bool {
        libm::fabs(*self - 1.0) <= ROW_SUM_TOLERANCE
    }

    fn is_negligible(&self) -> bool {
        *self <= ZERO_MASS_THRESHOLD
    }
}

impl Scalar for Exact {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_exact(value: &Exact) -> Self {
        value.clone()
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_null(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_unit_sum(&self) -> bool {
        One::is_one(self)
    }

    fn is_negligible(&self) -> bool {
        !Signed::is_positive(self)
    }
}

/// Sums values with a fixed pairwise tree so that the result depends only on
/// the order of `values`, never on how the work was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let mid = len / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Parses `a/b` or a plain decimal (`0.125`, `1`, `3e-2`) into an exact rational.
pub fn parse_exact(text: &str) -> Option<Exact> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Exact> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let mut digits = alloc::string::String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let mut num: BigInt = digits.parse().ok()?;
    if negative {
        num = -num;
    }
    let scale = exponent.checked_sub(frac_part.len() as i32)?;
    // keeps a hostile exponent from allocating a huge power of ten
    if scale.unsigned_abs() > 4096 {
        return None;
    }
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Formats an exact value as `a/b`, or `a` when the denominator is one.
pub fn format_exact(value: &Exact) -> alloc::string::String {
    use alloc::string::ToString;
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        alloc::format!("{}/{}", value.numer(), value.denom())
    }
}
