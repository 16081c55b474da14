//! Exact rational arithmetic helpers.
//!
//! Every probability, weight and utility in the crate is a [`Rational`]. Verdicts
//! compare sums for equality and order, so nothing here ever touches floating
//! point: decimal literals such as `0.015` are converted digit by digit.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `p`, `p/q`, `-p/q` or a decimal such as `0.015` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let malformed = || RationalParseError::Malformed(text.to_string());
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        let num = parse_digits(num).ok_or_else(malformed)?;
        let den = parse_digits(den).ok_or_else(malformed)?;
        if den.is_zero() {
            return Err(RationalParseError::ZeroDenominator(text.to_string()));
        }
        Rational::new(num, den)
    } else if let Some((whole, frac)) = body.split_once('.') {
        let whole = parse_digits(whole).ok_or_else(malformed)?;
        let frac_digits = parse_digits(frac).ok_or_else(malformed)?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        Rational::new(whole * &scale + frac_digits, scale)
    } else {
        Rational::from_integer(parse_digits(body).ok_or_else(malformed)?)
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

/// Display adapter that always prints `p/q`, including `1/1` and `0/1`.
#[derive(Debug, Clone, Copy)]
pub struct Ratio<'a>(pub &'a Rational);

impl fmt::Display for Ratio<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// `p/q` string form used by reports.
pub fn ratio_string(r: &Rational) -> String {
    Ratio(r).to_string()
}

/// Compact form used by the model format: integers print bare, fractions as `p/q`.
pub fn compact_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        ratio_string(r)
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Threshold strictly between zero and one used by both oblique-intent definitions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Confidence(Rational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("confidence must lie strictly between 0 and 1, got {0}")]
pub struct ConfidenceError(pub String);

impl Confidence {
    pub fn new(value: Rational) -> Result<Self, ConfidenceError> {
        if value.is_positive() && value < Rational::one() {
            Ok(Self(value))
        } else {
            Err(ConfidenceError(ratio_string(&value)))
        }
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }
}

impl Default for Confidence {
    /// 19/20, a stand-in for "virtual certainty".
    fn default() -> Self {
        Self(frac(19, 20))
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Ratio(&self.0).fmt(f)
    }
}
