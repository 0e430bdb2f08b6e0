//! Exact rational helpers: parsing, `"num/den"` formatting, and powers of two.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"a/b"`, a plain decimal such as `"0.25"`, or an integer.
///
/// Decimals are converted exactly: `"0.1"` is `1/10`, not the nearest double.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

/// Formats as `"num/den"` in lowest terms; the denominator is always present.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio_u(numer: &BigUint, denom: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(numer.clone()), BigInt::from(denom.clone()))
}

pub fn from_u64(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << e as usize)
}

/// Best-effort conversion to `f64`; very large or tiny values saturate.
pub fn to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        return v;
    }
    // direct conversion failed; saturate by magnitude
    let n = r.numer().abs().bits() as i64;
    let d = r.denom().bits() as i64;
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    if n - d > 1100 {
        sign * f64::INFINITY
    } else {
        0.0
    }
}

/// Exact lower rational approximation of a positive double, at resolution 2^-64.
pub fn floor_dyadic(x: f64) -> BigRational {
    assert!(x.is_finite() && x >= 0.0);
    let exact = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    let scale = BigInt::one() << 64usize;
    let scaled = (exact * BigRational::from_integer(scale.clone())).floor();
    scaled / BigRational::from_integer(scale)
}


/// Serde adapter storing a `BigRational` as a `"num/den"` string.
pub mod serde_str {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
