//! Riordan matrices `T(f|g)`, whose `j`-th column generates `x^j f/g^{j+1}`.

use num_traits::{One, Zero};

use crate::error::{Result, WardError};
use crate::rat::{rat, Rat};
use crate::series::Series;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RiordanPair {
    f: Series,
    g: Series,
}

/// The `A`-sequence of a Riordan matrix: `(x/A)∘(x/g) = x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ASeq(pub Series);

impl RiordanPair {
    /// Both series are truncated to their common precision.
    pub fn new(f: Series, g: Series) -> Result<Self> {
        if f.coeff(0).is_zero() {
            return Err(WardError::InvalidParameter("Riordan f must have f(0) ≠ 0".into()));
        }
        if g.coeff(0).is_zero() {
            return Err(WardError::InvalidParameter("Riordan g must have g(0) ≠ 0".into()));
        }
        let t = f.trunc().min(g.trunc());
        Ok(RiordanPair { f: f.truncate(t), g: g.truncate(t) })
    }

    /// `T(1|1)`.
    pub fn identity(trunc: usize) -> Self {
        RiordanPair { f: Series::one(trunc), g: Series::one(trunc) }
    }

    /// Pascal's triangle `T(1|1-x)`.
    pub fn pascal(trunc: usize) -> Self {
        RiordanPair::new(Series::one(trunc), Series::polynomial(&[rat(1), rat(-1)], trunc)).unwrap()
    }

    /// The inverse Pascal triangle `T(1|1+x)`.
    pub fn inverse_pascal(trunc: usize) -> Self {
        RiordanPair::new(Series::one(trunc), Series::polynomial(&[rat(1), rat(1)], trunc)).unwrap()
    }

    pub fn f(&self) -> &Series {
        &self.f
    }

    pub fn g(&self) -> &Series {
        &self.g
    }

    pub fn trunc(&self) -> usize {
        self.f.trunc()
    }

    /// The common ratio `x/g`.
    fn ratio(&self) -> Series {
        self.g.inverse().expect("g(0) ≠ 0").mul_x()
    }

    /// `T(f|g)(γ) = (f/g)·γ(x/g)`.
    pub fn apply(&self, gamma: &Series) -> Series {
        let ginv = self.g.inverse().expect("g(0) ≠ 0");
        let lead = &self.f * &ginv;
        let inner = ginv.mul_x();
        let composed = gamma.compose(&inner).expect("x/g has zero constant term");
        &lead.truncate(composed.trunc()) * &composed
    }

    /// `T(f|g)·T(l|m) = T(f·l(x/g) | g·m(x/g))`.
    pub fn mul(&self, other: &RiordanPair) -> RiordanPair {
        let u = self.ratio();
        let l = other.f.compose(&u).expect("x/g has zero constant term");
        let m = other.g.compose(&u).expect("x/g has zero constant term");
        RiordanPair::new(&self.f * &l, &self.g * &m).expect("product of Riordan pairs is Riordan")
    }

    /// `A` with `(x/A)∘(x/g) = x`.
    pub fn a_sequence(&self) -> ASeq {
        let v = reversion(&self.ratio()).expect("x/g has nonzero linear term");
        // v = x/A, so A = x/v = 1/(v/x)
        let a = v.div_x().expect("v has zero constant term").inverse().expect("v_1 ≠ 0");
        ASeq(a.truncate(self.trunc()))
    }

    /// `T(f|g)^{-1} = T(1/f(x/A) | A)`.
    pub fn inverse(&self) -> RiordanPair {
        let ASeq(a) = self.a_sequence();
        let v = a.inverse().expect("a_0 ≠ 0").mul_x();
        let f_at = self.f.compose(&v).expect("x/A has zero constant term");
        let f_new = f_at.inverse().expect("f(0) ≠ 0");
        let t = f_new.trunc().min(a.trunc());
        RiordanPair::new(f_new.truncate(t), a.truncate(t)).expect("inverse pair is Riordan")
    }

    /// Entry `(i, j) = [x^i] x^j f/g^{j+1}` for `0 ≤ j ≤ i ≤ rows`.
    pub fn materialize(&self, rows: usize) -> Result<Vec<Vec<Rat>>> {
        if rows > self.trunc() {
            return Err(WardError::PrecisionExhausted { needed: rows, available: self.trunc() });
        }
        let ginv = self.g.inverse().expect("g(0) ≠ 0");
        let mut column = &self.f * &ginv;
        let mut out: Vec<Vec<Rat>> = (0..=rows).map(|i| Vec::with_capacity(i + 1)).collect();
        for j in 0..=rows {
            for (i, row) in out.iter_mut().enumerate().skip(j) {
                row.push(column.coeff(i - j).clone());
            }
            column = &column * &ginv;
        }
        Ok(out)
    }
}

/// Compositional inverse of a series with `s_0 = 0`, `s_1 ≠ 0`.
pub fn reversion(s: &Series) -> Result<Series> {
    if !s.coeff(0).is_zero() {
        return Err(WardError::NonzeroInnerConstant);
    }
    let t = s.trunc();
    if t == 0 || s.coeff(1).is_zero() {
        return Err(WardError::InvalidParameter("reversion needs a nonzero linear term".into()));
    }
    let s1_inv = s.coeff(1).recip();
    let mut v = Series::monomial(1, s1_inv.clone(), t);
    // [x^n] s(v) is linear in v_n with slope s_1; solve term by term.
    for n in 2..=t {
        let trial = s.truncate(n).compose(&v.truncate(n))?;
        let residue = trial.coeff(n).clone();
        let mut c = v.into_coeffs();
        c[n] = -residue * &s1_inv;
        v = Series::new(c);
    }
    Ok(v)
}

/// Dense lower-triangular product, used to cross-check pair arithmetic.
pub fn matrix_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len().min(b.len());
    (0..n).map(|i| (0..=i).map(|j| (j..=i).fold(Rat::zero(), |acc, k| acc + &a[i][k] * &b[k][j])).collect()).collect()
}

pub fn is_identity(m: &[Vec<Rat>]) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, e)| if i == j { e.is_one() } else { e.is_zero() }))
}
