//! Named families of `h`, their combinatorial numbers, generalized
//! exponentials and hypergeometric series.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{ParseError, Result, WardError};
use crate::operators::HSeries;
use crate::rat::{binomial, factorial, format_rat, int, parse_rat, rat, sign, Rat};
use crate::series::Series;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatalogTag {
    /// `x/(1-x)^s`, the `s`-th column of Pascal's triangle (`s ≥ 1`).
    Pascal { s: u32 },
    /// `Σ k^α x^k`.
    Polylog { alpha: u32 },
    /// `x/(1-x-x^2)`.
    Fibonomial,
    /// `x/((1-x)(1-qx))`, coefficients `[n]_q`.
    QCalc { q: Rat },
    /// User-supplied coefficients without a known closed form.
    Custom,
}

impl FromStr for CatalogTag {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let bad = || ParseError(format!("unknown catalog tag {s:?}"));
        let (family, arg) = match s.split_once(':') {
            Some((f, a)) => (f, Some(a)),
            None => (s, None),
        };
        let int_arg = || -> std::result::Result<u32, ParseError> {
            arg.ok_or_else(bad)?.parse::<u32>().map_err(|_| ParseError(format!("bad integer parameter in {s:?}")))
        };
        match family {
            "pascal" => Ok(CatalogTag::Pascal { s: int_arg()? }),
            "polylog" => Ok(CatalogTag::Polylog { alpha: int_arg()? }),
            "fibonomial" if arg.is_none() => Ok(CatalogTag::Fibonomial),
            "q" => Ok(CatalogTag::QCalc { q: parse_rat(arg.ok_or_else(bad)?)? }),
            "custom" if arg.is_none() => Ok(CatalogTag::Custom),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for CatalogTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogTag::Pascal { s } => write!(f, "pascal:{s}"),
            CatalogTag::Polylog { alpha } => write!(f, "polylog:{alpha}"),
            CatalogTag::Fibonomial => write!(f, "fibonomial"),
            CatalogTag::QCalc { q } => write!(f, "q:{}", format_rat(q)),
            CatalogTag::Custom => write!(f, "custom"),
        }
    }
}

/// Builds the `h` of a catalog family up to `trunc`.
pub fn make_h(tag: &CatalogTag, trunc: usize) -> Result<HSeries> {
    let base = match tag {
        CatalogTag::Pascal { s } => {
            if *s < 1 {
                return Err(WardError::InvalidParameter("pascal column needs s ≥ 1".into()));
            }
            let one_minus_x = Series::polynomial(&[rat(1), rat(-1)], trunc);
            one_minus_x.pow(*s as usize).inverse()?.mul_x().truncate(trunc)
        }
        CatalogTag::Polylog { alpha } => Series::from_fn(trunc, |k| {
            if k == 0 {
                Rat::zero()
            } else {
                Rat::from_integer(num_traits::pow(BigInt::from(k), *alpha as usize))
            }
        }),
        CatalogTag::Fibonomial => Series::from_fn(trunc, |k| int(&fibonacci(k as u64))),
        CatalogTag::QCalc { q } => {
            if q.is_one() {
                return Err(WardError::InvalidParameter("q-calculus needs q ≠ 1".into()));
            }
            Series::from_fn(trunc, |k| q_integer(q, k as u64))
        }
        CatalogTag::Custom => {
            return Err(WardError::InvalidParameter("custom h has no generator; load it from a file".into()))
        }
    };
    HSeries::new(base).map_err(|e| match e {
        WardError::InvalidH { index, .. } => {
            WardError::InvalidParameter(format!("{tag} has vanishing coefficient h_{index}"))
        }
        other => other,
    })
}

/// `F_n` with `F_0 = 0`, `F_1 = 1`.
pub fn fibonacci(n: u64) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

/// `[n]_q = 1 + q + ⋯ + q^{n-1}`.
pub fn q_integer(q: &Rat, n: u64) -> Rat {
    let mut acc = Rat::zero();
    let mut p = Rat::one();
    for _ in 0..n {
        acc += &p;
        p *= q;
    }
    acc
}

/// Stirling numbers of the second kind by the alternating sum
/// `(1/k!) Σ_j (-1)^{k+j} C(k,j) j^n`.
pub fn stirling2(n: u64, k: u64) -> BigInt {
    let sum: BigInt = (0..=k)
        .map(|j| {
            let term = binomial(k, j) * num_traits::pow(BigInt::from(j), n as usize);
            term * sign(k + j)
        })
        .sum();
    sum / factorial(k)
}

/// Stirling numbers of the second kind by `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
pub fn stirling2_recurrence(n: u64, k: u64) -> BigInt {
    let mut row = vec![BigInt::one()];
    for m in 1..=n {
        let mut next = vec![BigInt::zero(); m as usize + 1];
        for j in 1..=m as usize {
            let stay = row.get(j).map_or(BigInt::zero(), |v| v * BigInt::from(j));
            next[j] = stay + &row[j - 1];
        }
        row = next;
    }
    row.get(k as usize).cloned().unwrap_or_default()
}

/// Eulerian numbers `E(n,k) = (k+1)E(n-1,k) + (n-k)E(n-1,k-1)`, `E(0,0) = 1`.
pub fn eulerian(n: u64, k: u64) -> BigInt {
    let mut row = vec![BigInt::one()];
    for m in 1..=n {
        let next: Vec<BigInt> = (0..=m)
            .map(|j| {
                let keep = row.get(j as usize).map_or(BigInt::zero(), |v| v * BigInt::from(j + 1));
                let carry = if j == 0 { BigInt::zero() } else { &row[j as usize - 1] * BigInt::from(m - j) };
                keep + carry
            })
            .collect();
        row = next;
    }
    row.get(k as usize).cloned().unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Combinatorial {
    Stirling2,
    Eulerian,
    Fibonacci,
    QInteger(Rat),
}

pub fn combinatorial_numbers(kind: &Combinatorial, n: u64, k: Option<u64>) -> Result<Rat> {
    let need_k = || k.ok_or_else(|| WardError::InvalidParameter("second index required".into()));
    Ok(match kind {
        Combinatorial::Stirling2 => {
            let k = need_k()?;
            let direct = stirling2(n, k);
            assert_eq!(direct, stirling2_recurrence(n, k), "Stirling routes disagree at ({n},{k})");
            int(&direct)
        }
        Combinatorial::Eulerian => int(&eulerian(n, need_k()?)),
        Combinatorial::Fibonacci => int(&fibonacci(n)),
        Combinatorial::QInteger(q) => q_integer(q, n),
    })
}

/// Rational closed form of `Σ_{k≥1} k^α x^k`: the Eulerian numerator
/// `Σ_i E(α,i) x^{α-i}` over `(1-x)^{α+1}`.
///
/// At `α = 0` the Eulerian numerator is `1`, which also counts the `0^0`
/// term; the family's own member is `x/(1-x)`, so that case is returned
/// directly.
pub fn polylog_closed_form(alpha: u32, trunc: usize) -> Series {
    if alpha == 0 {
        return Series::geometric(trunc).mul_x().truncate(trunc);
    }
    let a = alpha as usize;
    let mut numer = vec![Rat::zero(); a + 1];
    for i in 0..=a {
        numer[a - i] = int(&eulerian(alpha as u64, i as u64));
    }
    let num = Series::polynomial(&numer, trunc);
    let den = Series::polynomial(&[rat(1), rat(-1)], trunc).pow(a + 1);
    &num * &den.inverse().expect("(1-x)^{α+1} is invertible")
}

pub fn polylog_closed_form_check(alpha: u32, trunc: usize) -> bool {
    let direct = Series::from_fn(trunc, |k| {
        if k == 0 {
            Rat::zero()
        } else {
            Rat::from_integer(num_traits::pow(BigInt::from(k), alpha as usize))
        }
    });
    polylog_closed_form(alpha, trunc) == direct
}

/// `e_h^x = Σ x^k/(h_1⋯h_k)`.
pub fn generalized_exp(h: &HSeries, trunc: usize) -> Series {
    let t = trunc.min(h.trunc());
    let mut c = Rat::one();
    Series::from_fn(t, |k| {
        if k > 0 {
            c = &c / h.h(k);
        }
        c.clone()
    })
}

/// Rising factorial `(a)_n`.
pub fn pochhammer(a: &Rat, n: usize) -> Rat {
    (0..n).fold(Rat::one(), |acc, i| acc * (a + rat(i as i64)))
}

/// Truncated `pFq(upper; lower; scale·x)`.
pub fn hypergeom_pfq(upper: &[Rat], lower: &[Rat], scale: &Rat, trunc: usize) -> Result<Series> {
    for (index, b) in lower.iter().enumerate() {
        // (b)_k has the factor b + k - 1, which vanishes when b = 1 - k.
        if b.is_integer() && *b <= Rat::zero() {
            let term = usize::try_from(BigInt::one() - b.to_integer()).unwrap_or(usize::MAX);
            if term <= trunc {
                return Err(WardError::PochhammerPole { index, term });
            }
        }
    }
    let mut c = Rat::one();
    Ok(Series::from_fn(trunc, |k| {
        if k > 0 {
            let m = rat(k as i64 - 1);
            let num = upper.iter().fold(scale.clone(), |acc, a| acc * (a + &m));
            let den = lower.iter().fold(rat(k as i64), |acc, b| acc * (b + &m));
            c = &c * num / den;
        }
        c.clone()
    }))
}

/// `e_{h_s} = 1F_{s-1}(1; 1, 2, …, s-1; (s-1)!·x)` for the Pascal column `h_s`.
pub fn exp_equals_hypergeom_check(s: u32, trunc: usize) -> Result<bool> {
    if s < 2 {
        return Err(WardError::InvalidParameter("needs s ≥ 2".into()));
    }
    let h = make_h(&CatalogTag::Pascal { s }, trunc)?;
    let lower: Vec<Rat> = (1..s).map(|b| rat(b as i64)).collect();
    let scale = int(&factorial(s as u64 - 1));
    let hyp = hypergeom_pfq(&[rat(1)], &lower, &scale, trunc)?;
    Ok(generalized_exp(&h, trunc) == hyp)
}
