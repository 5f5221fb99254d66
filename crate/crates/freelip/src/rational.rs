//! Exact rational scalars and their canonical text form.
//!
//! Every quantity in this crate (distances, coefficients, norms, LP entries)
//! is a [`Rational`]: an arbitrary-precision fraction kept in lowest terms
//! with a positive denominator. There are no floats and no tolerances
//! anywhere; equality means equality.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always reduced, denominator positive.
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`. Panics if `d == 0`; intended for literals.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "rational literal with zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {text:?}: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

/// Parses `"num"` or `"num/den"` with arbitrary-precision parts.
///
/// Rejects a zero denominator and anything that is not a plain (optionally
/// signed) integer on each side of the slash.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        text: text.to_string(),
        reason,
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let num: BigInt = num_str.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = match den_str {
        Some(d) => d.parse().map_err(|_| err("bad denominator"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `"num"` for integers, `"num/den"` otherwise,
/// in lowest terms with the sign on the numerator.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True iff `r` is an integer.
pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Absolute value helper (re-exported convenience over `num_traits::Signed`).
pub fn rat_abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "5", "-3", "1/2", "-7/3", "100000000000000000001/7"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
    }

    #[test]
    fn parse_reduces_to_lowest_terms() {
        assert_eq!(format_rational(&parse_rational("4/6").unwrap()), "2/3");
        assert_eq!(format_rational(&parse_rational("-4/-6").unwrap()), "2/3");
        assert_eq!(format_rational(&parse_rational("3/-6").unwrap()), "-1/2");
        assert_eq!(format_rational(&parse_rational("8/4").unwrap()), "2");
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "1/0", "0/0", "a", "1/b", "1.5", "1/2/3", "1 2"] {
            assert!(parse_rational(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = rat(1, 3);
        let b = rat(1, 6);
        assert_eq!(&a + &b, rat(1, 2));
        assert_eq!(&a - &b, rat(1, 6));
        assert_eq!(&a * &b, rat(1, 18));
        assert_eq!(&a / &b, rat_int(2));
    }
}
