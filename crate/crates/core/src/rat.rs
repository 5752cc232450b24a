//! Exact rational scalars.
//!
//! All solver-facing arithmetic runs on [`Rat`], an arbitrary-precision
//! rational kept in canonical form (reduced, positive denominator) by
//! construction. Helpers here cover the wire format used everywhere else:
//! `"num/den"` strings, decimal literals, and dyadic grid values.

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Canonical exact rational: arbitrary-precision numerator over a positive
/// arbitrary-precision denominator, always fully reduced.
pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Integer as a `Rat`.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n / d` as a `Rat`. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"num/den"`, an integer literal, or a plain decimal literal
/// (`"0.125"` becomes exactly 1/8). No floating-point intermediate.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RatParseError::Empty);
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|_| RatParseError::Invalid(s.to_string()))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|_| RatParseError::Invalid(s.to_string()))?;
        if den.is_zero() {
            return Err(RatParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') {
            -1
        } else {
            1
        };
        let int_digits = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|_| RatParseError::Invalid(s.to_string()))?
        };
        if frac_part.is_empty() {
            return Ok(Rat::from_integer(int_digits));
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RatParseError::Invalid(s.to_string()));
        }
        let frac_num: BigInt = frac_part
            .parse()
            .map_err(|_| RatParseError::Invalid(s.to_string()))?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = Rat::new(frac_num * BigInt::from(sign), den);
        return Ok(Rat::from_integer(int_digits) + frac);
    }
    let num: BigInt = s
        .parse()
        .map_err(|_| RatParseError::Invalid(s.to_string()))?;
    Ok(Rat::from_integer(num))
}

/// Renders a `Rat` as `"num/den"`, denominator always present (`"0/1"`).
pub fn rat_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Non-authoritative decimal rendering with `sig` significant digits,
/// computed by exact long division (round half away from zero).
pub fn rat_decimal(r: &Rat, sig: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let sig = sig.max(1);
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    // exponent e: first significant digit sits at 10^e
    let mut e: i64 = 0;
    let mut lo = num.clone();
    let mut hi = den.clone();
    while lo < hi {
        lo *= 10;
        e -= 1;
    }
    while lo >= &hi * 10 {
        hi *= 10;
        e += 1;
    }
    // digits = round(num/den * 10^(sig-1-e))
    let shift = sig as i64 - 1 - e;
    let (mut n, mut d) = (num, den);
    if shift >= 0 {
        n *= BigInt::from(10u32).pow(shift as u32);
    } else {
        d *= BigInt::from(10u32).pow((-shift) as u32);
    }
    let mut digits: BigInt = (&n * 2 + &d) / (&d * 2);
    // rounding can carry into one more digit (e.g. 999.6 -> 1000)
    let mut digit_str = digits.to_string();
    if digit_str.len() > sig {
        digits /= 10;
        e += 1;
        digit_str = digits.to_string();
    }
    let digit_str = digit_str.trim_end_matches('0');
    let digit_str = if digit_str.is_empty() { "0" } else { digit_str };
    let sign = if neg { "-" } else { "" };
    if e >= sig as i64 + 3 || e <= -5 {
        // exponent form
        let mantissa = if digit_str.len() == 1 {
            digit_str.to_string()
        } else {
            format!("{}.{}", &digit_str[..1], &digit_str[1..])
        };
        return format!("{sign}{mantissa}e{e}");
    }
    if e >= 0 {
        let e = e as usize;
        if digit_str.len() > e + 1 {
            format!("{sign}{}.{}", &digit_str[..=e], &digit_str[e + 1..])
        } else {
            let zeros = "0".repeat(e + 1 - digit_str.len());
            format!("{sign}{digit_str}{zeros}")
        }
    } else {
        let zeros = "0".repeat((-e - 1) as usize);
        format!("{sign}0.{zeros}{digit_str}")
    }
}

/// `k / 2^bits` for the dyadic grids used by generators and perturbation.
pub fn dyadic(k: i64, bits: u32) -> Rat {
    Rat::new(BigInt::from(k), BigInt::one() << bits)
}

/// Exact conversion of a finite `f64` into a `Rat`.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Lossy f64 view, for display and trend fitting only.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let (num, den) = (r.numer(), r.denom());
        let scale = BigInt::from(1u64 << 53);
        let q = (num * &scale) / den;
        q.to_f64().map(|v| v / scale.to_f64().unwrap()).unwrap_or({
            if num.sign() == Sign::Minus {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_fraction_and_integer() {
        assert_eq!(parse_rat("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rat("-6/8").unwrap(), ratio(-3, 4));
        assert_eq!(parse_rat("7").unwrap(), rat(7));
        assert_eq!(parse_rat(" -2 ").unwrap(), rat(-2));
    }

    #[test]
    fn parse_decimal_is_exact() {
        assert_eq!(parse_rat("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rat("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rat("2.").unwrap(), rat(2));
        assert_eq!(parse_rat(".25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rat("-.25").unwrap(), ratio(-1, 4));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("a.b").is_err());
        assert!(parse_rat("1.2.3").is_err());
    }

    #[test]
    fn canonical_string() {
        assert_eq!(rat_string(&ratio(2, 4)), "1/2");
        assert_eq!(rat_string(&rat(0)), "0/1");
        assert_eq!(rat_string(&ratio(3, -6)), "-1/2");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat_decimal(&ratio(1, 8), 12), "0.125");
        assert_eq!(rat_decimal(&ratio(1, 3), 6), "0.333333");
        assert_eq!(rat_decimal(&rat(0), 12), "0");
        assert_eq!(rat_decimal(&ratio(-1, 2), 12), "-0.5");
        assert_eq!(rat_decimal(&rat(1250), 3), "1250");
        assert_eq!(rat_decimal(&ratio(2, 3), 3), "0.667");
        assert_eq!(rat_decimal(&ratio(1, 100_000_000), 3), "1e-8");
    }

    #[test]
    fn dyadic_grid() {
        assert_eq!(dyadic(1, 3), ratio(1, 8));
        assert_eq!(dyadic(-3, 1), ratio(-3, 2));
    }

    #[test]
    fn arithmetic_is_canonical() {
        let a = ratio(1, 6) + ratio(1, 3);
        assert_eq!(a, ratio(1, 2));
        assert_eq!(a.denom(), &BigInt::from(2));
    }
}
