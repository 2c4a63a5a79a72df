//! Exact rational arithmetic helpers.
//!
//! Utilities and thresholds are kept as `BigRational` end to end; only the
//! LP layer converts to floating point, and accepted solutions are checked
//! back in rationals.

use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational p/q. Panics when q = 0.
pub fn ratio(p: i64, q: i64) -> Rat {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses "p/q", a plain integer, or a decimal like "0.25" exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in '{s}'")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in '{s}'")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse()
                .map_err(|_| Error::Parse(format!("bad decimal '{s}'")))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal '{s}'")));
        }
        let digits: BigInt = frac
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal '{s}'")))?;
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigRational::new(digits, denom);
        let int_part = BigRational::from_integer(int_part);
        return Ok(if neg {
            int_part - frac_part
        } else {
            int_part + frac_part
        });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
    Ok(BigRational::from_integer(n))
}

/// Renders integers bare and everything else as "p/q".
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion for the floating-point LP layer.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Exact conversion of an LP-layer float back into a rational.
pub fn from_f64_exact(x: f64) -> Rat {
    BigRational::from_float(x).expect("non-finite float")
}

/// Floor of a non-negative rational as usize.
pub fn floor_usize(r: &Rat) -> usize {
    assert!(!r.is_negative(), "floor_usize on negative rational");
    r.floor().numer().to_usize().expect("floor out of range")
}

/// Ceiling log2 of a positive integer-valued count, as used for log-factors.
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n > 0);
    usize::BITS - (n - 1).leading_zeros().max(0)
}

/// Largest s >= 0 with 2^s <= value, or None when value < 1.
pub fn floor_log2(value: &Rat) -> Option<u32> {
    if value < &rat(1) {
        return None;
    }
    let mut s = 0u32;
    let two = rat(2);
    let mut pow = two.clone();
    while &pow <= value {
        s += 1;
        pow *= two.clone();
    }
    Some(s)
}

/// Exact comparison n^(p/q) <= bound for positive n, epsilon = p/q.
///
/// Runs on big integers: n^p <= bound^q with denominators cleared.
pub fn pow_eps_le(n: usize, epsilon: &Rat, bound: &Rat) -> bool {
    let p = epsilon.numer().to_u32().expect("epsilon numerator too big");
    let q = epsilon.denom().to_u32().expect("epsilon denominator too big");
    let n = BigInt::from(n);
    // n^p <= (a/b)^q  <=>  n^p * b^q <= a^q
    let lhs = n.pow(p) * bound.denom().pow(q);
    let rhs = bound.numer().pow(q);
    lhs <= rhs
}

/// n^epsilon as a rational upper estimate, only for diagnostics and traces.
pub fn pow_eps_f64(n: usize, epsilon: &Rat) -> f64 {
    (n as f64).powf(to_f64(epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rat("3").unwrap(), rat(3));
        assert_eq!(parse_rat("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rat("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse_rat("x/y").is_err());
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for r in [rat(7), ratio(22, 7), ratio(-3, 8)] {
            assert_eq!(parse_rat(&fmt_rat(&r)).unwrap(), r);
        }
    }

    #[test]
    fn log_helpers() {
        assert_eq!(floor_log2(&rat(8)), Some(3));
        assert_eq!(floor_log2(&ratio(7, 2)), Some(1));
        assert_eq!(floor_log2(&ratio(1, 2)), None);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(1), 0);
    }

    #[test]
    fn exact_power_comparison() {
        // 16^(1/2) = 4 <= 4
        assert!(pow_eps_le(16, &ratio(1, 2), &rat(4)));
        // 16^(1/2) = 4 > 7/2
        assert!(!pow_eps_le(16, &ratio(1, 2), &ratio(7, 2)));
    }
}
