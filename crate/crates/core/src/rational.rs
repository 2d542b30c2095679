use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The only numeric type of the core: arbitrary-precision rationals.
/// `BigRational` keeps gcd(|numerator|, denominator) = 1 and denominator > 0
/// by construction, which is exactly the canonical form we need for
/// structural equality and ordering.
pub type Rational = BigRational;

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_probability(q: &Rational) -> bool {
    !q.is_negative() && *q <= one()
}

pub fn is_strict_probability(q: &Rational) -> bool {
    q.is_positive() && *q < one()
}

/// Parses `INT` or `INT/INT`. Columns in the reported error are relative to
/// the start of `text`.
pub fn parse_rational(text: &str, line: usize, col: usize) -> Result<Rational> {
    let mk_err = || Error::parse(line, col, format!("expected rational, got `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let num: BigInt = num.trim().parse().map_err(|_| mk_err())?;
    let den: BigInt = match den {
        Some(d) => d.trim().parse().map_err(|_| mk_err())?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::parse(line, col, format!("zero denominator in `{text}`")));
    }
    Ok(Rational::new(num, den))
}

/// Renders with an explicit denominator, `3/4`, `1/1`, `0/1`.
pub fn fmt_exact(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Plain rendering: integers without denominator, `1`, `0`, `3/4`.
pub fn fmt_plain(q: &Rational) -> String {
    q.to_string()
}

/// Decimal rendering with 6 significant digits, for display only; the exact
/// value is always reported alongside.
pub fn fmt_decimal(q: &Rational) -> String {
    const DIGITS: u32 = 6;
    if q.is_zero() {
        return "0".to_string();
    }
    let neg = q.is_negative();
    let mut v = q.abs();
    let ten = Rational::from(BigInt::from(10));
    // Scale into [10^(DIGITS-1), 10^DIGITS), remembering the decimal shift.
    let lo = Rational::from(BigInt::from(10).pow(DIGITS - 1));
    let hi = Rational::from(BigInt::from(10).pow(DIGITS));
    let mut shift: i32 = 0;
    while v < lo {
        v *= &ten;
        shift += 1;
    }
    while v >= hi {
        v /= &ten;
        shift -= 1;
    }
    let mantissa = v.round().to_integer();
    let digits = mantissa.to_string();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if shift <= 0 {
        out.push_str(&digits);
        for _ in 0..(-shift) {
            out.push('0');
        }
    } else if (shift as usize) < digits.len() {
        let point = digits.len() - shift as usize;
        out.push_str(&digits[..point]);
        out.push('.');
        out.push_str(&digits[point..]);
    } else {
        out.push_str("0.");
        for _ in 0..(shift as usize - digits.len()) {
            out.push('0');
        }
        out.push_str(&digits);
    }
    // Trim trailing zeros after a decimal point.
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_int_and_fraction() {
        assert_eq!(parse_rational("3", 1, 1).unwrap(), ratio(3, 1));
        assert_eq!(parse_rational("2/4", 1, 1).unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0", 1, 1).is_err());
        assert!(parse_rational("x", 1, 1).is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(fmt_exact(&ratio(1, 2)), "1/2");
        assert_eq!(fmt_exact(&one()), "1/1");
        assert_eq!(fmt_plain(&one()), "1");
        assert_eq!(fmt_decimal(&ratio(1, 2)), "0.5");
        assert_eq!(fmt_decimal(&ratio(1, 3)), "0.333333");
        assert_eq!(fmt_decimal(&ratio(3, 16)), "0.1875");
        assert_eq!(fmt_decimal(&zero()), "0");
        assert_eq!(fmt_decimal(&ratio(1, 1024)), "0.000976563");
    }
}
