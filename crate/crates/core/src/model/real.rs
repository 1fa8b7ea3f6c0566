//! Exact scalars for hypothesis checks.
//!
//! Exponents are compared on their exact values: a float is taken as the
//! binary rational it denotes, and strings such as `"6/7"` or `"0.1"` are
//! read as the rational they spell.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealError {
    #[error("value is not finite")]
    NonFinite,
    #[error("cannot parse `{0}` as a number or ratio")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// An exact rational value with a cached `f64` approximation.
#[derive(Clone)]
pub struct Real {
    exact: BigRational,
    approx: f64,
}

impl Real {
    pub fn from_f64(x: f64) -> Result<Self, RealError> {
        let exact = BigRational::from_float(x).ok_or(RealError::NonFinite)?;
        Ok(Self { exact, approx: x })
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn integer(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    pub fn from_exact(exact: BigRational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        Self { exact, approx }
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn to_f64(&self) -> f64 {
        self.approx
    }

    pub fn is_positive(&self) -> bool {
        self.exact.is_positive()
    }

    /// True when the value is exactly representable as an `f64`.
    pub fn is_binary(&self) -> bool {
        BigRational::from_float(self.approx).as_ref() == Some(&self.exact)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for Real {}

impl std::hash::Hash for Real {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.exact.hash(state)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exact.cmp(&other.exact)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({self})")
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decimal = self.approx.to_string();
        if parse_decimal(&decimal).as_ref() == Some(&self.exact) {
            write!(f, "{decimal}")
        } else if self.exact.denom().is_one() {
            write!(f, "{}", self.exact.numer())
        } else {
            write!(f, "{}/{}", self.exact.numer(), self.exact.denom())
        }
    }
}

impl From<i64> for Real {
    fn from(n: i64) -> Self {
        Self::integer(n)
    }
}

impl TryFrom<f64> for Real {
    type Error = RealError;

    fn try_from(x: f64) -> Result<Self, Self::Error> {
        Self::from_f64(x)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

impl FromStr for Real {
    type Err = RealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let exact = match s.split_once('/') {
            Some((num, den)) => {
                let num = parse_decimal(num).ok_or_else(|| RealError::Malformed(s.into()))?;
                let den = parse_decimal(den).ok_or_else(|| RealError::Malformed(s.into()))?;
                if den.is_zero() {
                    return Err(RealError::ZeroDenominator(s.into()));
                }
                num / den
            }
            None => parse_decimal(s).ok_or_else(|| RealError::Malformed(s.into()))?,
        };
        Ok(Self::from_exact(exact))
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_binary() {
            serializer.serialize_f64(self.approx)
        } else {
            serializer.collect_str(self)
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(n) => Ok(Real::integer(n)),
            Repr::Float(x) => Real::from_f64(x).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ratios_and_decimals_exactly() {
        assert_eq!("6/7".parse::<Real>().unwrap(), Real::ratio(6, 7));
        assert_eq!("0.1".parse::<Real>().unwrap(), Real::ratio(1, 10));
        assert_eq!("1.5e-3".parse::<Real>().unwrap(), Real::ratio(3, 2000));
        assert_eq!("-2".parse::<Real>().unwrap(), Real::integer(-2));
        assert_eq!("3/1.5".parse::<Real>().unwrap(), Real::integer(2));
        assert!("1/0".parse::<Real>().is_err());
        assert!("abc".parse::<Real>().is_err());
        assert!(".".parse::<Real>().is_err());
    }

    #[test]
    fn float_is_taken_at_its_binary_value() {
        let tenth = Real::from_f64(0.1).unwrap();
        assert_ne!(tenth, Real::ratio(1, 10));
        assert!(tenth > Real::ratio(1, 10));
        assert!(Real::from_f64(f64::NAN).is_err());
        assert!(Real::from_f64(f64::INFINITY).is_err());
    }

    #[test]
    fn display_round_trips() {
        for r in [
            Real::ratio(6, 7),
            Real::from_f64(0.1).unwrap(),
            Real::ratio(1, 10),
            Real::integer(4),
        ] {
            assert_eq!(r.to_string().parse::<Real>().unwrap(), r);
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(serde_json::from_str::<Real>(&json).unwrap(), r);
        }
        assert_eq!(Real::ratio(6, 7).to_string(), "6/7");
        assert_eq!(Real::ratio(3, 2).to_string(), "1.5");
    }
}
