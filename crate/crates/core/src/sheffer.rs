//! Rewriting `D_h` in classical derivatives:
//! `D_h(y) = Σ_{k≥1} c_k x^{k-1} y^{(k)}` with
//! `c_k = (1/k!) Σ_{j=0}^{k} (-1)^{k+j} C(k,j) h_j`.
//!
//! Equivalently `k!·c_k = a_k` where `a` is the inverse-Pascal transform of
//! `h`. When `a` is a polynomial of degree `m` the expansion stops at `k = m`
//! (a finite calculus).

use num_traits::Zero;
use serde::Serialize;

use crate::catalog::{make_h, CatalogTag};
use crate::error::{Result, WardError};
use crate::operators::HSeries;
use crate::rat::{binomial, factorial, int, rat, sign, Rat};
use crate::riordan::RiordanPair;
use crate::series::Series;

/// Coefficients `c_1, …, c_trunc` of the monomials `L_k^h(x) = c_k x^{k-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShefferExpansion {
    c: Vec<Rat>,
    finite_degree: Option<usize>,
}

impl ShefferExpansion {
    /// `c_k` for `1 ≤ k ≤ len`.
    pub fn c(&self, k: usize) -> &Rat {
        &self.c[k - 1]
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    /// Number of known coefficients (the truncation of `h`).
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree `m` of a certified finite calculus.
    pub fn finite_degree(&self) -> Option<usize> {
        self.finite_degree
    }
}

/// Provenance that lets a finite/infinite verdict be certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    Catalog(CatalogTag),
    /// `h` is the Pascal transform of this polynomial `a`.
    Polynomial(Series),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "degree")]
pub enum CalculusVerdict {
    FiniteDegree(usize),
    InfiniteCertified,
    /// Every known `c_k` with `k > m` vanishes, but nothing is known beyond.
    FiniteUpToTrunc(usize),
    UnknownBeyondTrunc,
}

/// `a = T(1|1+x)·h`, computed as a Riordan action.
pub fn inverse_pascal_transform(h: &HSeries) -> Series {
    RiordanPair::inverse_pascal(h.trunc()).apply(h.series())
}

fn explicit_coeff(h: &HSeries, k: usize) -> Rat {
    let sum = (0..=k)
        .fold(Rat::zero(), |acc, j| acc + int(&binomial(k as u64, j as u64)) * h.h(j) * rat(sign((k + j) as u64)));
    sum / int(&factorial(k as u64))
}

/// Expansion coefficients from the explicit alternating sum; cross-checked
/// against the inverse-Pascal route.
pub fn sheffer_coeffs(h: &HSeries) -> ShefferExpansion {
    let c: Vec<Rat> = (1..=h.trunc()).map(|k| explicit_coeff(h, k)).collect();
    let a = inverse_pascal_transform(h);
    for (k, ck) in c.iter().enumerate().map(|(i, v)| (i + 1, v)) {
        assert_eq!(
            ck * int(&factorial(k as u64)),
            *a.coeff(k),
            "explicit and inverse-Pascal coefficients disagree at k = {k}"
        );
    }
    ShefferExpansion { c, finite_degree: None }
}

/// Like [`sheffer_coeffs`], with `finite_degree` filled in when the closed
/// form certifies a finite calculus.
pub fn sheffer_expansion(h: &HSeries, closed_form: Option<&ClosedForm>) -> Result<ShefferExpansion> {
    let mut e = sheffer_coeffs(h);
    if let CalculusVerdict::FiniteDegree(m) = classify_calculus(h, closed_form)? {
        e.finite_degree = Some(m);
    }
    Ok(e)
}

/// `Σ_{k=1}^{K} w(k) x^{k-1} y^{(k)}` with classical derivatives.
///
/// With `exact_tail` the weights past `K` are known to vanish and the result
/// is known up to `y.trunc - 1`; otherwise they are unknown and it is known
/// up to `min(y.trunc, K) - 1`.
fn classical_sum(y: &Series, max_k: usize, exact_tail: bool, weight: impl Fn(usize) -> Rat) -> Result<Series> {
    let t = y.trunc().min(max_k);
    let known = if exact_tail { y.trunc() } else { t };
    if known == 0 {
        return Err(WardError::PrecisionExhausted { needed: 1, available: 0 });
    }
    let out_trunc = known - 1;
    let mut acc = Series::zero(out_trunc);
    for k in 1..=t {
        let w = weight(k);
        if w.is_zero() {
            continue;
        }
        let term = y.nth_derivative(k)?.shift_up(k - 1).truncate(out_trunc);
        acc = &acc + &term.scale(&w);
    }
    Ok(acc)
}

/// Applies the expansion with classical derivatives.
pub fn reconstruct_apply(e: &ShefferExpansion, y: &Series) -> Result<Series> {
    classical_sum(y, e.len(), false, |k| e.c(k).clone())
}

pub fn classify_calculus(h: &HSeries, closed_form: Option<&ClosedForm>) -> Result<CalculusVerdict> {
    match closed_form {
        Some(ClosedForm::Catalog(CatalogTag::Custom)) | None => Ok(raw_verdict(h)),
        Some(ClosedForm::Catalog(tag)) => {
            let expected = make_h(tag, h.trunc())?;
            if &expected != h {
                return Err(WardError::InvalidParameter(format!("h does not match closed form {tag}")));
            }
            Ok(match tag {
                CatalogTag::Pascal { s } if *s >= 2 => CalculusVerdict::FiniteDegree(*s as usize - 1),
                CatalogTag::Polylog { alpha } if *alpha >= 1 => CalculusVerdict::FiniteDegree(*alpha as usize),
                // x/(1-x) (pascal:1, polylog:0): c_k = (-1)^{k-1}/k!
                // fibonomial: c_k = (-1)^{k+1} F_k/k!
                // q-calculus: c_k = (q-1)^{k-1}/k! with q ≠ 1
                _ => CalculusVerdict::InfiniteCertified,
            })
        }
        Some(ClosedForm::Polynomial(a)) => {
            let m = a.degree().ok_or_else(|| WardError::InvalidParameter("a must be nonzero".into()))?;
            let expected = pascal_transform(a, h.trunc());
            if &expected != h.series() {
                return Err(WardError::InvalidParameter("h is not the Pascal transform of a".into()));
            }
            Ok(CalculusVerdict::FiniteDegree(m))
        }
    }
}

fn raw_verdict(h: &HSeries) -> CalculusVerdict {
    let e = sheffer_coeffs(h);
    let last = e.c.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    if last < e.len() {
        CalculusVerdict::FiniteUpToTrunc(last)
    } else {
        CalculusVerdict::UnknownBeyondTrunc
    }
}

/// `h_n = Σ_k C(n,k) a_k`, treating `a` as a polynomial.
fn pascal_transform(a: &Series, trunc: usize) -> Series {
    Series::from_fn(trunc, |n| {
        a.coeffs()
            .iter()
            .enumerate()
            .take(n + 1)
            .fold(Rat::zero(), |acc, (k, ak)| acc + int(&binomial(n as u64, k as u64)) * ak)
    })
}

/// The `h` whose expansion coefficients are `a_k/k!` for a polynomial `a`.
///
/// `h` is computed three ways (binomial sums, the Pascal Riordan action, and
/// the rational form `Σ a_k x^k (1-x)^{m-k} / (1-x)^{m+1}`) and they must
/// agree. Fails with the first `n` whose binomial sum vanishes.
pub fn h_from_a(a: &Series, trunc: usize) -> Result<HSeries> {
    if !a.coeff(0).is_zero() {
        return Err(WardError::InvalidParameter("a must have a_0 = 0".into()));
    }
    let m = match a.degree() {
        Some(m) if m >= 1 => m,
        _ => return Err(WardError::InvalidParameter("a must have degree ≥ 1".into())),
    };
    let binomial_sums = pascal_transform(a, trunc);
    if let Some(n) = (1..=trunc).find(|&n| binomial_sums.coeff(n).is_zero()) {
        return Err(WardError::InvalidH { index: n, reason: "vanishes" });
    }

    let poly = a.as_polynomial(trunc);
    let via_riordan = RiordanPair::pascal(trunc).apply(&poly);

    let one_minus_x = Series::polynomial(&[rat(1), rat(-1)], trunc);
    let numer = (1..=m).fold(Series::zero(trunc), |acc, k| {
        let term = one_minus_x.pow(m - k).shift_up(k).truncate(trunc).scale(a.coeff(k));
        &acc + &term
    });
    let rational = &numer * &one_minus_x.pow(m + 1).inverse()?;

    assert_eq!(binomial_sums, via_riordan, "Pascal action disagrees with binomial sums");
    assert_eq!(binomial_sums, rational, "rational form disagrees with binomial sums");
    HSeries::new(binomial_sums)
}

/// Checks three expressions of `D_{h_s}` for `h_s = x/(1-x)^s`: the direct
/// derivative, `Σ_{k=1}^{s-1} C(s-2,k-1)/k! x^{k-1} y^{(k)}`, and
/// `Σ_{k=0}^{s-1} C(s-1,k) x^k/k! (D_0 y)^{(k)}`.
pub fn pascal_column_expansion_check(s: u32, y: &Series) -> Result<bool> {
    if s < 2 {
        return Err(WardError::InvalidParameter("needs s ≥ 2".into()));
    }
    let t = y.trunc();
    let h = make_h(&CatalogTag::Pascal { s }, t)?;
    let direct = h.derivative(y)?;

    let finite = classical_sum(y, s as usize - 1, true, |k| {
        int(&binomial(s as u64 - 2, k as u64 - 1)) / int(&factorial(k as u64))
    })?;

    let d0y = HSeries::jackson0(t).derivative(y)?;
    let mut column_sum = Series::zero(d0y.trunc());
    for k in 0..s as usize {
        if k > d0y.trunc() {
            break;
        }
        let w = int(&binomial(s as u64 - 1, k as u64)) / int(&factorial(k as u64));
        let term = d0y.nth_derivative(k)?.shift_up(k).truncate(d0y.trunc());
        column_sum = &column_sum + &term.scale(&w);
    }

    let u = t - 1;
    Ok(direct.trunc() == u && direct.agrees_with(&finite, u) && direct.agrees_with(&column_sum, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn generic_h() -> HSeries {
        HSeries::new(Series::from_ints(&[0, 3, -2, 7, 5, 11, -4])).unwrap()
    }

    #[test]
    fn low_order_coefficients() {
        let h = generic_h();
        let e = sheffer_coeffs(&h);
        let (h1, h2, h3) = (h.h(1), h.h(2), h.h(3));
        assert_eq!(e.c(1), h1);
        assert_eq!(e.c(2), &((h2 - rat(2) * h1) / rat(2)));
        assert_eq!(e.c(3), &((rat(3) * h1 - rat(3) * h2 + h3) / rat(6)));
    }

    #[test]
    fn jackson_coefficients() {
        let e = sheffer_coeffs(&HSeries::jackson0(10));
        for k in 1..=10u64 {
            assert_eq!(e.c(k as usize), &(rat(sign(k - 1)) / int(&factorial(k))));
        }
    }

    #[test]
    fn worked_example_a_is_x_plus_x2() {
        let a = Series::from_ints(&[0, 1, 1]);
        let h = h_from_a(&a, 12).unwrap();
        for n in 1..=12u64 {
            assert_eq!(h.h(n as usize), &int(&binomial(n + 1, 2)));
        }
        let e = sheffer_expansion(&h, Some(&ClosedForm::Polynomial(a))).unwrap();
        assert_eq!(e.c(1), &rat(1));
        assert_eq!(e.c(2), &frac(1, 2));
        assert!(e.coeffs()[2..].iter().all(Zero::is_zero));
        assert_eq!(e.finite_degree(), Some(2));

        let y = Series::from_ints(&[2, -1, 3, 0, 5, 1, -7, 2, 4, 1, 1, 9, 3]);
        let lhs = reconstruct_apply(&e, &y).unwrap();
        let yp = y.derivative().unwrap();
        let ypp = y.nth_derivative(2).unwrap().mul_x().scale(&frac(1, 2));
        assert_eq!(lhs, &yp + &ypp);
        assert_eq!(lhs, h.derivative(&y).unwrap());
    }

    #[test]
    fn x_minus_x2_is_rejected_at_three() {
        let a = Series::from_ints(&[0, 1, -1]);
        assert_eq!(h_from_a(&a, 10), Err(WardError::InvalidH { index: 3, reason: "vanishes" }));
        assert!(h_from_a(&a, 2).is_ok());
    }

    #[test]
    fn a_is_x_gives_classical() {
        let h = h_from_a(&Series::from_ints(&[0, 1]), 9).unwrap();
        assert_eq!(h, HSeries::classical(9));
        assert!(h_from_a(&Series::from_ints(&[1, 1]), 4).is_err());
        assert!(h_from_a(&Series::zero(3), 4).is_err());
    }

    #[test]
    fn reconstruct_on_constants_and_monomials() {
        let h = generic_h();
        let e = sheffer_coeffs(&h);
        assert!(reconstruct_apply(&e, &Series::one(6)).unwrap().is_zero());
        for n in 0..=6 {
            let xn = Series::monomial(n, rat(1), 6);
            let expect = if n == 0 { Series::zero(5) } else { Series::monomial(n - 1, h.h(n).clone(), 5) };
            assert_eq!(reconstruct_apply(&e, &xn).unwrap(), expect);
        }
    }

    #[test]
    fn q_calculus_coefficients() {
        for q in [rat(2), frac(3, 2), rat(-2), frac(-1, 3)] {
            let h = make_h(&CatalogTag::QCalc { q: q.clone() }, 9).unwrap();
            let e = sheffer_coeffs(&h);
            for k in 1..=9u64 {
                let expect = crate::rat::pow(&(&q - rat(1)), k as i64 - 1) / int(&factorial(k));
                assert_eq!(e.c(k as usize), &expect, "q = {q}, k = {k}");
            }
            // the alternative (-1)^{k+1}[k]_q/k! already differs at k = 2
            let alt = rat(-1) * crate::catalog::q_integer(&q, 2) / rat(2);
            assert_ne!(e.c(2), &alt);
        }
    }

    #[test]
    fn catalog_verdicts() {
        let v = |tag: CatalogTag| {
            let h = make_h(&tag, 12).unwrap();
            classify_calculus(&h, Some(&ClosedForm::Catalog(tag))).unwrap()
        };
        for s in 2..=6 {
            assert_eq!(v(CatalogTag::Pascal { s }), CalculusVerdict::FiniteDegree(s as usize - 1));
        }
        assert_eq!(v(CatalogTag::Pascal { s: 1 }), CalculusVerdict::InfiniteCertified);
        assert_eq!(v(CatalogTag::Polylog { alpha: 3 }), CalculusVerdict::FiniteDegree(3));
        assert_eq!(v(CatalogTag::Polylog { alpha: 0 }), CalculusVerdict::InfiniteCertified);
        assert_eq!(v(CatalogTag::Fibonomial), CalculusVerdict::InfiniteCertified);
        assert_eq!(v(CatalogTag::QCalc { q: rat(2) }), CalculusVerdict::InfiniteCertified);
    }

    #[test]
    fn raw_verdicts_never_certify() {
        let h = make_h(&CatalogTag::Pascal { s: 4 }, 10).unwrap();
        assert_eq!(classify_calculus(&h, None).unwrap(), CalculusVerdict::FiniteUpToTrunc(3));
        assert_eq!(classify_calculus(&HSeries::jackson0(10), None).unwrap(), CalculusVerdict::UnknownBeyondTrunc);
        let wrong = ClosedForm::Catalog(CatalogTag::Pascal { s: 3 });
        assert!(classify_calculus(&h, Some(&wrong)).is_err());
    }

    #[test]
    fn pascal_column_checks() {
        // s = 2 is the classical derivative
        let y = Series::from_ints(&[1, 4, -2, 8, 3, 3, 1]);
        assert!(pascal_column_expansion_check(2, &y).unwrap());
        let h2 = make_h(&CatalogTag::Pascal { s: 2 }, 6).unwrap();
        assert_eq!(h2.derivative(&y).unwrap(), y.derivative().unwrap());

        let x3 = Series::monomial(3, rat(1), 6);
        assert!(pascal_column_expansion_check(4, &x3).unwrap());
        let h4 = make_h(&CatalogTag::Pascal { s: 4 }, 6).unwrap();
        // h_3 = C(5,3) = 10
        assert_eq!(h4.derivative(&x3).unwrap(), Series::monomial(2, rat(10), 5));
        for s in 3..=6 {
            assert!(pascal_column_expansion_check(s, &y).unwrap());
        }
        assert!(pascal_column_expansion_check(1, &y).is_err());
    }

    #[test]
    fn verdict_json_shape() {
        assert_eq!(
            serde_json::to_string(&CalculusVerdict::InfiniteCertified).unwrap(),
            r#"{"verdict":"InfiniteCertified"}"#
        );
        assert_eq!(
            serde_json::to_string(&CalculusVerdict::FiniteDegree(3)).unwrap(),
            r#"{"verdict":"FiniteDegree","degree":3}"#
        );
    }
}
