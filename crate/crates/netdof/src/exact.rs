//! Exact rational plumbing: harmonic numbers, parsing, and rendering.
//!
//! Every closed-form expression in this crate is evaluated in arbitrary-
//! precision rational arithmetic. Crossover boundaries between schemes are
//! decided by exact comparison, never through floats, because harmonic
//! numbers have large denominators and several boundaries land exactly on
//! integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseRatioError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an unsigned integer.
pub fn from_int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Harmonic number H_k = 1 + 1/2 + ... + 1/k in lowest terms.
pub fn harmonic(k: usize) -> BigRational {
    assert!(k >= 1, "harmonic number needs k >= 1");
    (1..=k).map(|i| ratio(1, i as i64)).sum()
}

/// Parses "p/q", plain integers, and decimal literals ("0.25" -> 1/4)
/// exactly, without a float round-trip.
pub fn parse_ratio(text: &str) -> Result<BigRational, ParseRatioError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRatioError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| ParseRatioError::Invalid(s.into()))?;
        let d = BigInt::from_str(den.trim()).map_err(|_| ParseRatioError::Invalid(s.into()))?;
        if d.is_zero() {
            return Err(ParseRatioError::ZeroDenominator(s.into()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let sign = if whole.trim_start().starts_with('-') {
            -1
        } else {
            1
        };
        let w = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| ParseRatioError::Invalid(s.into()))?
        };
        if frac.is_empty() {
            return Ok(BigRational::from_integer(w));
        }
        let digits = BigInt::from_str(frac).map_err(|_| ParseRatioError::Invalid(s.into()))?;
        if digits.is_negative() {
            return Err(ParseRatioError::Invalid(s.into()));
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigRational::new(digits * sign, scale);
        return Ok(BigRational::from_integer(w) + frac_part);
    }
    let n = BigInt::from_str(s).map_err(|_| ParseRatioError::Invalid(s.into()))?;
    Ok(BigRational::from_integer(n))
}

/// "p/q" rendering; integers render without the denominator.
pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest-f64 value of a rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Renders a float with the given number of significant digits, using plain
/// decimal notation for moderate exponents and scientific otherwise.
pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let formatted = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = formatted
        .split_once('e')
        .expect("exponential format always has an e");
    let exp: i32 = exp.parse().expect("valid exponent");
    let negative = mantissa.starts_with('-');
    let digits_only: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits_only = digits_only.trim_end_matches('0');
    let digits_only = if digits_only.is_empty() {
        "0"
    } else {
        digits_only
    };

    if !(-4..=(digits as i32 + 2)).contains(&exp) {
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push_str(&digits_only[..1]);
        if digits_only.len() > 1 {
            out.push('.');
            out.push_str(&digits_only[1..]);
        }
        out.push('e');
        out.push_str(&exp.to_string());
        return out;
    }

    // reassemble a plain decimal string from the mantissa digits
    let point = exp + 1; // digits before the decimal point
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..(-point) {
            out.push('0');
        }
        out.push_str(digits_only);
    } else if (point as usize) >= digits_only.len() {
        out.push_str(digits_only);
        for _ in 0..(point as usize - digits_only.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digits_only[..point as usize]);
        out.push('.');
        out.push_str(&digits_only[point as usize..]);
    }
    out
}

/// Rational rendered at 12 significant digits.
pub fn format_ratio_decimal(r: &BigRational) -> String {
    format_significant(to_f64(r), 12)
}
