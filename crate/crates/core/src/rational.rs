//! Exact rational values and recognition of floats as small-denominator rationals.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in reduced form with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RationalError {
    #[error("no rational with denominator <= {max_denominator} lies within {tol:e} of {value}")]
    NoRationalFound {
        value: f64,
        max_denominator: u64,
        tol: f64,
    },
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("non-finite value {0}")]
    NonFinite(f64),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_f64(r: &Rational) -> f64 {
    // numerator/denominator may exceed f64 range individually; fall back to a scaled division
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = r.denom().bits().max(r.numer().bits()) as i64 - 900;
            let scale = BigInt::one() << shift.max(0) as usize;
            let n = (r.numer() / &scale).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() / &scale).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"-0.25"` (decimals are converted exactly).
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let s = text.trim();
    let bad = || RationalError::Malformed(text.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let whole = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| bad())?
        };
        let scale = num::pow(BigInt::from(10), frac.len());
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = whole.abs() * &scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(numer, scale));
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Display wrapper printing `p/q`, or `p` for integers.
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    Display(r).to_string()
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rational) -> Rational {
    r - r.floor()
}

/// Continued-fraction recognition of `x` as a rational.
///
/// Walks the convergents of `x` (and, past the last admissible convergent, the best
/// semiconvergent) and returns the first candidate with denominator at most
/// `max_denominator` lying strictly within `tol` of `x`. Smaller denominators win.
pub fn rationalize(x: f64, max_denominator: u64, tol: f64) -> Result<Rational, RationalError> {
    if !x.is_finite() {
        return Err(RationalError::NonFinite(x));
    }
    assert!(max_denominator >= 1 && tol > 0.0);
    let not_found = RationalError::NoRationalFound {
        value: x,
        max_denominator,
        tol,
    };
    let max_den = max_denominator as i128;
    let close = |p: i128, q: i128| (x - p as f64 / q as f64).abs() < tol;

    // h_{n-1}/k_{n-1}, h_{n-2}/k_{n-2}
    let (mut h1, mut k1): (i128, i128) = (1, 0);
    let (mut h2, mut k2): (i128, i128) = (0, 1);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if a.abs() > 1e18 {
            break;
        }
        let a = a as i128;
        let (h, k) = (a * h1 + h2, a * k1 + k2);
        if k > max_den {
            // best semiconvergent with denominator under the bound
            let steps = (max_den - k2) / k1;
            for t in 1..=steps.min(a) {
                let (hs, ks) = (t * h1 + h2, t * k1 + k2);
                if ks <= max_den && close(hs, ks) {
                    return Ok(ratio_i128(hs, ks));
                }
            }
            return Err(not_found);
        }
        if close(h, k) {
            return Ok(ratio_i128(h, k));
        }
        let f = rem - a as f64;
        if f <= 0.0 {
            break;
        }
        rem = 1.0 / f;
        (h2, k2, h1, k1) = (h1, k1, h, k);
    }
    Err(not_found)
}

fn ratio_i128(p: i128, q: i128) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `true` when the two values agree to within `tol` after conversion to f64.
pub fn approx_eq(r: &Rational, x: f64, tol: f64) -> bool {
    (to_f64(r) - x).abs() < tol
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&format_rational(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse_rational(&t).map_err(D::Error::custom))
                .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn recognizes_rho_value() {
        assert_eq!(rationalize(1.8666666667, 1_000_000, 1e-9).unwrap(), ratio(28, 15));
    }

    #[test]
    fn zero_is_zero_over_one() {
        let r = rationalize(0.0, 7, 1e-12).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.denom(), &BigInt::one());
    }

    #[test]
    fn denominator_bound_rejects_one_third() {
        let err = rationalize(0.3333333333, 2, 1e-9).unwrap_err();
        assert!(matches!(err, RationalError::NoRationalFound { .. }));
    }

    #[test]
    fn negative_values() {
        assert_eq!(rationalize(-2.0 / 3.0, 100, 1e-12).unwrap(), ratio(-2, 3));
        assert_eq!(rationalize(-10.0 / 3.0, 100, 1e-12).unwrap(), ratio(-10, 3));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("28/15").unwrap(), ratio(28, 15));
        assert_eq!(parse_rational("-1/120").unwrap(), ratio(-1, 120));
        assert_eq!(parse_rational("150").unwrap(), int(150));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("2/-4").unwrap(), ratio(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_rational(&ratio(73, 15)), "73/15");
        assert_eq!(format_rational(&ratio(-6, 3)), "-2");
        assert_eq!(format_rational(&frac(&ratio(-10, 3))), "2/3");
    }

    proptest! {
        #[test]
        fn round_trip(p in -10_000i64..=10_000, q in 1i64..=10_000) {
            let r = ratio(p, q);
            let back = rationalize(to_f64(&r), *r.denom().to_u64().as_ref().unwrap(), 1e-9).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
