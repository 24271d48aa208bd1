//! Exact rational scalars.
//!
//! All geometry and observability decisions are made over arbitrary-precision
//! rationals; floats only appear in the online policy loops. `Rat` is kept in
//! canonical form (reduced, positive denominator) by construction.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number, always canonical.
pub type Rat = BigRational;

/// Error raised when a textual number cannot be read exactly.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct RatParseError {
    pub literal: String,
    pub reason: String,
}

/// Rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rat {
    assert!(denom != 0, "zero denominator");
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Rational from a machine integer.
pub fn rat_int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

/// Lossy conversion for the float-valued policy loops.
pub fn rat_to_f64(value: &Rat) -> f64 {
    value.to_f64().expect("rational out of f64 range")
}

/// Canonical `p/q` rendering (used by documents and reports).
pub fn format_rat(value: &Rat) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

fn err(literal: &str, reason: impl Into<String>) -> RatParseError {
    RatParseError {
        literal: literal.to_string(),
        reason: reason.into(),
    }
}

fn parse_bigint(text: &str, literal: &str) -> Result<BigInt, RatParseError> {
    text.parse::<BigInt>()
        .map_err(|_| err(literal, format!("bad integer part {text:?}")))
}

/// Parses `p/q`, integer, or decimal (optionally exponent) literals exactly.
///
/// Decimals convert to the rational they denote as written: `0.1` is exactly
/// `1/10`, never the nearest double.
pub fn parse_rat(literal: &str) -> Result<Rat, RatParseError> {
    let text = literal.trim();
    if text.is_empty() {
        return Err(err(literal, "empty"));
    }
    if let Some((numer, denom)) = text.split_once('/') {
        let numer = parse_bigint(numer.trim(), literal)?;
        let denom = parse_bigint(denom.trim(), literal)?;
        if denom.is_zero() {
            return Err(err(literal, "zero denominator"));
        }
        return Ok(Rat::new(numer, denom));
    }
    parse_decimal(text, literal)
}

/// Exact decimal parser: `[-]digits[.digits][(e|E)[-]digits]`.
fn parse_decimal(text: &str, literal: &str) -> Result<Rat, RatParseError> {
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e
                .parse()
                .map_err(|_| err(literal, format!("bad exponent {e:?}")))?;
            (m, exp)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err(literal, "no digits"));
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err(literal, "non-digit characters"));
    }
    let digits = format!("{int_digits}{frac_part}");
    let digits = if digits.is_empty() { "0".into() } else { digits };
    let unsigned = parse_bigint(&digits, literal)?;
    let signed = if negative { -unsigned } else { unsigned };
    let scale = frac_part.len() as i64 - exponent;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rat::new(signed, ten.pow(scale as u32))
    } else {
        Rat::from_integer(signed * ten.pow((-scale) as u32))
    };
    Ok(value)
}

/// Infinity norm of a rational vector.
pub fn inf_norm(values: impl IntoIterator<Item = Rat>) -> Rat {
    values
        .into_iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rat::zero)
}

/// Exact dot product.
pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
