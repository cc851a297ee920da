//! Exact rational scalars shared across the crate.
//!
//! All geometric and potential arithmetic is exact; floating point appears
//! only in reporting and in the closed-form alpha/bound formulas, where it is
//! immediately converted to an exact rational.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `n / d`, panicking on a zero denominator.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_one() -> Q {
    Q::one()
}

/// Exact conversion from a finite float (every finite f64 is a binary rational).
pub fn q_from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses "a/b", integers, and plain decimals ("1.25") exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|e| Error::Domain(format!("bad numerator {num:?}: {e}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|e| Error::Domain(format!("bad denominator {den:?}: {e}")))?;
        if d.is_zero() {
            return Err(Error::Domain(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let frac_digits = frac_part.len() as u32;
        let combined = format!("{int_part}{frac_part}");
        let n = BigInt::from_str(&combined)
            .map_err(|e| Error::Domain(format!("bad decimal {s:?}: {e}")))?;
        let d = BigInt::from(10u32).pow(frac_digits);
        return Ok(Q::new(n, d));
    }
    let n = BigInt::from_str(s).map_err(|e| Error::Domain(format!("bad rational {s:?}: {e}")))?;
    Ok(Q::from_integer(n))
}

/// Renders without a denominator when integral, else as "a/b".
pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact rational wrapper with human-friendly JSON encoding: accepts a JSON
/// number or a string like "3/4" or "1.25"; serializes as a string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(pub Q);

impl Rat {
    pub fn as_q(&self) -> &Q {
        &self.0
    }
}

impl From<Q> for Rat {
    fn from(q: Q) -> Self {
        Rat(q)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_q(&self.0))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_q(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RatVisitor;
        impl<'de> de::Visitor<'de> for RatVisitor {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a rational string like \"3/4\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rat, E> {
                Ok(Rat(q_int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rat, E> {
                Ok(Rat(Q::from_integer(BigInt::from(v))))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rat, E> {
                q_from_f64(v).map(Rat).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rat, E> {
                parse_q(v).map(Rat).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(RatVisitor)
    }
}

/// Sign with the convention sign(0) = +1, as used by halfspace labels.
pub fn nonneg(x: &Q) -> bool {
    !x.is_negative()
}
