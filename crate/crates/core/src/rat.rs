//! Exact rationals and the handful of integer combinatorics used everywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ParseError;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: &BigInt) -> Rat {
    Rat::from_integer(n.clone())
}

/// Parses `"p"` or `"p/q"` with optional leading sign on `p`.
pub fn parse_rat(token: &str) -> Result<Rat, ParseError> {
    let t = token.trim();
    let bad = || ParseError(format!("malformed fraction {token:?}"));
    let digits = |s: &str| -> Result<BigInt, ParseError> {
        let body = s.strip_prefix(['-', '+']).unwrap_or(s);
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse::<BigInt>().map_err(|_| bad())
    };
    match t.split_once('/') {
        None => Ok(Rat::from_integer(digits(t)?)),
        Some((p, q)) => {
            let num = digits(p)?;
            if q.starts_with(['-', '+']) {
                return Err(bad());
            }
            let den = digits(q)?;
            if den.is_zero() {
                return Err(ParseError(format!("zero denominator in {token:?}")));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn sign(k: u64) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `r^e` for a possibly negative exponent; `0^0 = 1`.
pub fn pow(r: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow(r.clone(), e as usize)
    } else {
        num_traits::pow(r.recip(), e.unsigned_abs() as usize)
    }
}
