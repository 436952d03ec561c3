//! Truncated formal power series over Q.
//!
//! A [`Series`] stores the coefficients of `x^0 ..= x^trunc`; everything past
//! `trunc` is unknown. Every operation returns a result whose truncation is
//! the largest exponent still fully determined by the inputs, so binary
//! operations take the minimum and shifting operations move it.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ParseError, Result, WardError};
use crate::rat::{format_rat, parse_rat, pow, rat, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Series {
    coeffs: Vec<Rat>,
}

/// Valuation of a truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    At(usize),
    /// Every known coefficient vanishes.
    AboveTrunc,
}

impl Order {
    pub fn value(self) -> Option<usize> {
        match self {
            Order::At(k) => Some(k),
            Order::AboveTrunc => None,
        }
    }
}

/// Result of the ultrametric `d(a, b) = 2^{-ω(a-b)}` on truncated data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distance {
    Exact(Rat),
    /// The known prefixes coincide; the true distance is at most this value.
    AtMost(Rat),
}

impl Distance {
    /// The exact value, or the certified upper bound.
    pub fn upper(&self) -> &Rat {
        match self {
            Distance::Exact(r) | Distance::AtMost(r) => r,
        }
    }

    pub fn exact(&self) -> Option<&Rat> {
        match self {
            Distance::Exact(r) => Some(r),
            Distance::AtMost(_) => None,
        }
    }
}

/// `2^{-k}` as an exact rational.
pub fn half_pow(k: i64) -> Rat {
    pow(&rat(2), -k)
}

impl Series {
    /// Builds a series from its known coefficients.
    ///
    /// Panics on an empty vector: a series always knows at least `x^0`.
    pub fn new(coeffs: Vec<Rat>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Series { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Series::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn from_fn(trunc: usize, f: impl FnMut(usize) -> Rat) -> Self {
        Series::new((0..=trunc).map(f).collect())
    }

    pub fn zero(trunc: usize) -> Self {
        Series::from_fn(trunc, |_| Rat::zero())
    }

    pub fn constant(c: Rat, trunc: usize) -> Self {
        let mut s = Series::zero(trunc);
        s.coeffs[0] = c;
        s
    }

    pub fn one(trunc: usize) -> Self {
        Series::constant(Rat::one(), trunc)
    }

    /// `c·x^k` known up to `trunc` (zero if `k > trunc`).
    pub fn monomial(k: usize, c: Rat, trunc: usize) -> Self {
        let mut s = Series::zero(trunc);
        if k <= trunc {
            s.coeffs[k] = c;
        }
        s
    }

    /// `1/(1-x)`.
    pub fn geometric(trunc: usize) -> Self {
        Series::from_fn(trunc, |_| Rat::one())
    }

    /// Polynomial given by its coefficient list, padded with zeros to `trunc`.
    /// Coefficients past `trunc` are dropped.
    pub fn polynomial(coeffs: &[Rat], trunc: usize) -> Self {
        Series::from_fn(trunc, |k| coeffs.get(k).cloned().unwrap_or_else(Rat::zero))
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rat> {
        self.coeffs
    }

    /// Coefficient of `x^k`. Panics when `k > trunc`.
    pub fn coeff(&self, k: usize) -> &Rat {
        &self.coeffs[k]
    }

    pub fn get(&self, k: usize) -> Option<&Rat> {
        self.coeffs.get(k)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Keeps coefficients `0..=min(t, trunc)`.
    pub fn truncate(&self, t: usize) -> Series {
        let t = t.min(self.trunc());
        Series::new(self.coeffs[..=t].to_vec())
    }

    /// Treats the known coefficients as an exact polynomial and re-expresses
    /// it with truncation `t` (padding with zeros or dropping terms).
    pub fn as_polynomial(&self, t: usize) -> Series {
        Series::polynomial(&self.coeffs, t)
    }

    /// Index of the last nonzero known coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// True when both series agree on every coefficient `0..=upto`.
    pub fn agrees_with(&self, other: &Series, upto: usize) -> bool {
        upto <= self.trunc() && upto <= other.trunc() && self.coeffs[..=upto] == other.coeffs[..=upto]
    }

    pub fn scale(&self, c: &Rat) -> Series {
        Series::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    fn zip_with(&self, other: &Series, f: impl Fn(&Rat, &Rat) -> Rat) -> Series {
        Series::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect())
    }

    /// Cauchy product.
    pub fn cauchy_mul(&self, other: &Series) -> Series {
        let t = self.trunc().min(other.trunc());
        Series::from_fn(t, |n| {
            (0..=n).fold(Rat::zero(), |acc, i| {
                let (a, b) = (&self.coeffs[i], &other.coeffs[n - i]);
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    acc + a * b
                }
            })
        })
    }

    /// Termwise product.
    pub fn hadamard(&self, other: &Series) -> Series {
        self.zip_with(other, |a, b| a * b)
    }

    /// Multiplicative inverse, requiring a nonzero constant term.
    pub fn inverse(&self) -> Result<Series> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(WardError::ZeroConstantTerm);
        }
        let inv0 = a0.recip();
        let mut out: Vec<Rat> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for n in 1..=self.trunc() {
            let s = (1..=n).fold(Rat::zero(), |acc, i| acc + &self.coeffs[i] * &out[n - i]);
            out.push(-s * &inv0);
        }
        Ok(Series::new(out))
    }

    /// Non-negative Cauchy power.
    pub fn pow(&self, e: usize) -> Series {
        let mut acc = Series::one(self.trunc());
        for _ in 0..e {
            acc = acc.cauchy_mul(self);
        }
        acc
    }

    /// `self(inner(x))`, defined when `inner` has zero constant term.
    pub fn compose(&self, inner: &Series) -> Result<Series> {
        if !inner.coeffs[0].is_zero() {
            return Err(WardError::NonzeroInnerConstant);
        }
        let t = self.trunc().min(inner.trunc());
        let inner = inner.truncate(t);
        // Horner: f0 + g(f1 + g(f2 + ...))
        let mut acc = Series::constant(self.coeffs[t].clone(), t);
        for k in (0..t).rev() {
            acc = acc.cauchy_mul(&inner);
            acc.coeffs[0] += &self.coeffs[k];
        }
        Ok(acc)
    }

    /// `x·self`; gains one known coefficient.
    pub fn mul_x(&self) -> Series {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(Rat::zero());
        c.extend(self.coeffs.iter().cloned());
        Series::new(c)
    }

    /// `x^k·self`.
    pub fn shift_up(&self, k: usize) -> Series {
        let mut c = vec![Rat::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        Series::new(c)
    }

    /// `self/x`; requires a zero constant term and loses one coefficient.
    pub fn div_x(&self) -> Result<Series> {
        if !self.coeffs[0].is_zero() {
            return Err(WardError::InvalidParameter("division by x of a series with nonzero constant term".into()));
        }
        if self.trunc() == 0 {
            return Err(WardError::PrecisionExhausted { needed: 1, available: 0 });
        }
        Ok(Series::new(self.coeffs[1..].to_vec()))
    }

    /// Classical derivative.
    pub fn derivative(&self) -> Result<Series> {
        if self.trunc() == 0 {
            return Err(WardError::PrecisionExhausted { needed: 1, available: 0 });
        }
        Ok(Series::new(self.coeffs[1..].iter().enumerate().map(|(k, c)| c * rat(k as i64 + 1)).collect()))
    }

    /// `k`-th classical derivative.
    pub fn nth_derivative(&self, k: usize) -> Result<Series> {
        if k > self.trunc() {
            return Err(WardError::PrecisionExhausted { needed: k, available: self.trunc() });
        }
        // coefficient j of y^{(k)} is (j+k)!/j! · y_{j+k}
        Ok(Series::from_fn(self.trunc() - k, |j| {
            let falling: BigInt = ((j + 1)..=(j + k)).map(BigInt::from).product();
            &self.coeffs[j + k] * Rat::from_integer(falling)
        }))
    }

    pub fn order(&self) -> Order {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(k) => Order::At(k),
            None => Order::AboveTrunc,
        }
    }

    /// Ultrametric distance `2^{-ω(self - other)}`.
    pub fn ultra_dist(&self, other: &Series) -> Distance {
        let diff = self - other;
        match diff.order() {
            Order::At(k) => Distance::Exact(half_pow(k as i64)),
            Order::AboveTrunc => Distance::AtMost(half_pow(diff.trunc() as i64 + 1)),
        }
    }

    /// Comma-separated canonical fractions, e.g. `1,1/2,1/6`.
    pub fn to_list(&self) -> String {
        self.coeffs.iter().map(format_rat).collect::<Vec<_>>().join(",")
    }

    /// Parses a comma-separated fraction list; truncation is `len - 1`.
    pub fn parse_list(text: &str) -> std::result::Result<Series, ParseError> {
        let coeffs = text.split(',').map(parse_rat).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Series::new(coeffs))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("series serialization is infallible")
    }

    pub fn from_json(text: &str) -> std::result::Result<Series, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    trunc: usize,
    coeffs: Vec<String>,
}

impl Serialize for Series {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr { trunc: self.trunc(), coeffs: self.coeffs.iter().map(format_rat).collect() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Series {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SeriesRepr::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.trunc + 1 {
            return Err(D::Error::custom(format!(
                "trunc {} requires {} coefficients, got {}",
                repr.trunc,
                repr.trunc + 1,
                repr.coeffs.len()
            )));
        }
        let coeffs = repr
            .coeffs
            .iter()
            .map(|c| parse_rat(c))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| D::Error::custom(e.0))?;
        Ok(Series::new(coeffs))
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", format_rat(c))?,
                1 => write!(f, "({})x", format_rat(c))?,
                _ => write!(f, "({})x^{}", format_rat(c), k)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.trunc() + 1)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.cauchy_mul(rhs)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Series {
            type Output = Series;
            fn $m(self, rhs: Series) -> Series {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
