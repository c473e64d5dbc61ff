//! Exact rational scalars.
//!
//! Every numeric value in the crate is a [`Rational`]; there is no floating
//! point on any code path that produces or checks a result.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision fraction, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// `num / den`, reduced. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"` or `"p"`. Whitespace around the literal is ignored.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

pub fn relu(x: &Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else {
        x.clone()
    }
}

/// The clipped activation `min(1, max(0, x))`.
pub fn clamp01(x: &Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else if *x > Rational::one() {
        Rational::one()
    } else {
        x.clone()
    }
}

pub fn in_unit_interval(x: &Rational) -> bool {
    !x.is_negative() && *x <= Rational::one()
}

pub fn is_integer(x: &Rational) -> bool {
    x.denom().is_one()
}

/// True when `x` lies in `{ b / scale : b integer }`.
pub fn has_denominator_dividing(x: &Rational, scale: u64) -> bool {
    (BigInt::from(scale) % x.denom()).is_zero()
}

/// `x` as an `i64`, if it is an integer in range.
pub fn to_i64(x: &Rational) -> Option<i64> {
    if is_integer(x) {
        x.numer().to_i64()
    } else {
        None
    }
}

/// Least common multiple of the denominators.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Smallest integer `>= x`.
pub fn ceil(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

pub fn floor(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-2/4").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(" 6/3 ").unwrap(), int(2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn display_is_exact() {
        assert_eq!(rat(2, 4).to_string(), "1/2");
        assert_eq!(int(-7).to_string(), "-7");
        assert_eq!(rat(-3, 9).to_string(), "-1/3");
    }

    #[test]
    fn clamp_and_relu() {
        assert_eq!(clamp01(&rat(3, 2)), int(1));
        assert_eq!(clamp01(&rat(-1, 2)), int(0));
        assert_eq!(clamp01(&rat(1, 3)), rat(1, 3));
        assert_eq!(relu(&rat(-1, 3)), int(0));
        assert_eq!(relu(&rat(5, 3)), rat(5, 3));
    }

    #[test]
    fn denominators() {
        assert!(has_denominator_dividing(&rat(1, 3), 3));
        assert!(has_denominator_dividing(&rat(2, 3), 6));
        assert!(!has_denominator_dividing(&rat(1, 2), 3));
        assert!(has_denominator_dividing(&int(4), 1));
        assert_eq!(lcm_of_denominators(&[rat(1, 2), rat(1, 3), int(1)]), BigInt::from(6));
    }
}
