//! Exact rational arithmetic helpers.
//!
//! Every quantity in the solver is a [`Rational`] (arbitrary-precision
//! numerator and denominator). On the wire rationals are strings of the form
//! `"p/q"` or `"p"`; they are always written back as `"p/q"`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// Integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` in lowest terms. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `max(q, 0)`.
pub fn pos(q: Rational) -> Rational {
    if q.is_negative() {
        Rational::zero()
    } else {
        q
    }
}

pub fn sum<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational")]
    Empty,
    #[error("invalid rational {0:?}: expected \"p\" or \"p/q\" with decimal integers")]
    Syntax(String),
    #[error("invalid rational {0:?}: zero denominator")]
    ZeroDenominator(String),
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses `"p"` or `"p/q"` (optional leading `-` on `p`, `q` unsigned).
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num = parse_int(num).ok_or_else(|| ParseRationalError::Syntax(s.to_string()))?;
    let den = match den {
        None => BigInt::one(),
        Some(d) if d.starts_with('-') => return Err(ParseRationalError::Syntax(s.to_string())),
        Some(d) => parse_int(d).ok_or_else(|| ParseRationalError::Syntax(s.to_string()))?,
    };
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"p/q"` rendering (lowest terms, positive denominator).
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Decimal rendering rounded (half away from zero) to `sig` significant
/// digits, without exponent notation. Trailing fractional zeros are trimmed.
pub fn to_decimal(q: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if q.is_zero() {
        return "0".to_string();
    }
    let negative = q.is_negative();
    let a = q.abs();
    let ten = BigInt::from(10);

    // Find e with 10^e <= a < 10^(e+1).
    let mut e: i64 = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    loop {
        let lo = pow10(e);
        if a < lo {
            e -= 1;
            continue;
        }
        if a >= pow10(e + 1) {
            e += 1;
            continue;
        }
        break;
    }
    // Scale so that the integer part carries `sig` digits.
    let shift = sig as i64 - 1 - e;
    let scaled = &a * pow10(shift);
    let (quot, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = quot;
    if Rational::new(rem * BigInt::from(2), scaled.denom().clone()) >= Rational::one() {
        digits += 1;
    }
    // Rounding may have produced an extra digit (e.g. 9.99.. -> 10.0..).
    let mut shift = shift;
    if digits.to_string().len() > sig {
        digits /= &ten;
        shift -= 1;
    }
    let s = digits.to_string();
    let body = if shift <= 0 {
        let mut s = s;
        for _ in 0..(-shift) {
            s.push('0');
        }
        s
    } else {
        let shift = shift as usize;
        let padded = if s.len() <= shift {
            format!("{}{}", "0".repeat(shift - s.len() + 1), s)
        } else {
            s
        };
        let (ip, fp) = padded.split_at(padded.len() - shift);
        let fp = fp.trim_end_matches('0');
        if fp.is_empty() {
            ip.to_string()
        } else {
            format!("{ip}.{fp}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn pow10(e: i64) -> Rational {
    let p = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Wrapper that displays a rational as `"p/q"`.
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Serde adapter for a single rational stored as a string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        format_rational(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a sequence of rationals stored as strings.
pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(format_rational).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
