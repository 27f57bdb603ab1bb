//! Parsing and rendering of exact fractions.
//!
//! Inputs are integers (`"-3"`, `7`) or fractions (`"499/1000"`). Decimal
//! notation is rejected outright so no binary rounding can sneak in.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use ratlp::{rat, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty number")]
    Empty,
    #[error("decimal notation is not accepted, write {0:?} as a fraction p/q")]
    Decimal(String),
    #[error("not an integer or p/q fraction: {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    if s.contains(['.', 'e', 'E']) {
        return Err(RationalParseError::Decimal(s.to_string()));
    }
    let int = |part: &str| -> Result<BigInt, RationalParseError> {
        let part = part.trim();
        let digits = part.strip_prefix(['-', '+']).unwrap_or(part);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RationalParseError::Malformed(s.to_string()));
        }
        part.parse().map_err(|_| RationalParseError::Malformed(s.to_string()))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(int(s)?)),
        Some((p, q)) => {
            let (p, q) = (int(p)?, int(q)?);
            if q.is_zero() {
                return Err(RationalParseError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Exact canonical form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn exact(r: &Rational) -> String {
    r.to_string()
}

/// Decimal annotation with six places. For display only.
pub fn decimal(r: &Rational) -> String {
    match r.to_f64() {
        Some(f) if f.is_finite() => format!("{f:.6}"),
        _ => {
            let sign = if r.is_negative() { "-" } else { "" };
            format!("{sign}inf")
        }
    }
}

/// Exact value with a decimal annotation, e.g. `21/8 (≈ 2.625000)`.
pub fn annotated(r: &Rational) -> String {
    if r.is_integer() {
        exact(r)
    } else {
        format!("{} (≈ {})", exact(r), decimal(r))
    }
}

/// Percentage rendering of a ratio, for display only.
pub fn percent(r: &Rational) -> String {
    match r.to_f64() {
        Some(f) if f.is_finite() => format!("{:.2}%", f * 100.0),
        _ => "n/a".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("-100").unwrap(), rat(-100, 1));
        assert_eq!(parse_rational(" 499/1000 ").unwrap(), rat(499, 1000));
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3/-6").unwrap(), rat(1, 2));
    }

    #[test]
    fn rejects_decimals_and_garbage() {
        assert!(matches!(parse_rational("0.5"), Err(RationalParseError::Decimal(_))));
        assert!(matches!(parse_rational("1e3"), Err(RationalParseError::Decimal(_))));
        assert!(matches!(
            parse_rational("1/0"),
            Err(RationalParseError::ZeroDenominator(_))
        ));
        assert!(matches!(parse_rational("1/2/3"), Err(RationalParseError::Malformed(_))));
        assert!(matches!(parse_rational("abc"), Err(RationalParseError::Malformed(_))));
        assert_eq!(parse_rational(""), Err(RationalParseError::Empty));
    }

    #[test]
    fn rendering() {
        assert_eq!(exact(&rat(21, 8)), "21/8");
        assert_eq!(exact(&rat(10, 2)), "5");
        assert_eq!(annotated(&rat(21, 8)), "21/8 (≈ 2.625000)");
        assert_eq!(percent(&rat(21, 40)), "52.50%");
    }
}
