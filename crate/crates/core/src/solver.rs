//! Initial value problems for `D_h`.
//!
//! The general route iterates `F(f) = Σ_{j<n} y_j x^j/(h_1⋯h_j) + I_h^n(G(f))`
//! from the zero series; `F` is ½-contractive, so every iteration fixes at
//! least one more coefficient. Constant-coefficient linear problems
//! `C(D_h)y = q` also have the closed form `y = (1/C*)(I_h)(y_0 + I_h(r))`,
//! and, when `C` splits over Q, a partial-fraction form. An independent
//! coefficient recursion serves as the oracle for all of them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, WardError};
use crate::operators::{i_h, op_series_apply, HSeries, SeriesOperator};
use crate::rat::{int, pow, rat, Rat};
use crate::series::Series;

/// Right-hand side `G` of `D_h^{(n)} y = G(y)`, restricted to forms whose
/// Lipschitz constant is known from their structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhsSpec {
    /// `G(y) = Σ q_i y^i` (non-expansive).
    Polynomial { q: Vec<Series> },
    /// `G(y) = q + Σ_i p_i D_h^{(i)}(y)`, `i < n` (`2^{n-1}`-Lipschitz).
    LinearDh { q: Series, p: Vec<Series> },
    /// `G(y) = f(I_h)(y) + r` (non-expansive).
    AffineIntegralOp { f: Series, r: Series },
}

impl RhsSpec {
    /// `G(y) = y`.
    pub fn identity(trunc: usize) -> Self {
        RhsSpec::LinearDh { q: Series::zero(trunc), p: vec![Series::one(trunc)] }
    }

    pub fn eval(&self, h: &HSeries, y: &Series) -> Result<Series> {
        match self {
            RhsSpec::Polynomial { q } => {
                let mut acc = Series::zero(y.trunc());
                let mut power = Series::one(y.trunc());
                for (i, qi) in q.iter().enumerate() {
                    if i > 0 {
                        power = &power * y;
                    }
                    acc = &acc + &(qi * &power);
                }
                Ok(acc)
            }
            RhsSpec::LinearDh { q, p } => {
                let mut acc = q.clone();
                let mut deriv = y.clone();
                for (i, pi) in p.iter().enumerate() {
                    if i > 0 {
                        deriv = h.derivative(&deriv)?;
                    }
                    acc = &acc + &(pi * &deriv);
                }
                Ok(acc)
            }
            RhsSpec::AffineIntegralOp { f, r } => Ok(&op_series_apply(f, &i_h(h), y)? + r),
        }
    }
}

/// `D_h^{(n)} y = G(y)` with `D_h^{(j)}(y)(0) = y_j` for `j < n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IvProblem {
    pub h: HSeries,
    pub n: usize,
    pub rhs: RhsSpec,
    pub init: Vec<Rat>,
}

impl IvProblem {
    pub fn new(h: HSeries, n: usize, rhs: RhsSpec, init: Vec<Rat>) -> Result<Self> {
        if n == 0 {
            return Err(WardError::InvalidParameter("equation order must be ≥ 1".into()));
        }
        if init.len() != n {
            return Err(WardError::InvalidParameter(format!("order {n} needs {n} initial values, got {}", init.len())));
        }
        if let RhsSpec::LinearDh { p, .. } = &rhs {
            if p.len() > n {
                return Err(WardError::InvalidParameter(format!(
                    "linear right-hand side may use D_h^(i) only for i < {n}"
                )));
            }
        }
        Ok(IvProblem { h, n, rhs, init })
    }

    /// `y_0 + y_1 x/h_1 + ⋯ + y_{n-1} x^{n-1}/(h_1⋯h_{n-1})`.
    pub fn affine_part(&self, trunc: usize) -> Series {
        initial_polynomial(&self.h, &self.init, trunc)
    }

    /// One application of the contraction `F`.
    pub fn step(&self, f: &Series) -> Result<Series> {
        let g = self.rhs.eval(&self.h, f)?;
        let lifted = self.h.integral_n(&g, self.n);
        Ok(&self.affine_part(f.trunc()) + &lifted)
    }

    /// Substitutes `y` back: `D_h^{(n)} y` equals `G(y)` on their common
    /// precision and every initial condition holds.
    pub fn verify(&self, y: &Series) -> Result<bool> {
        let lhs = self.h.derivative_n(y, self.n)?;
        let rhs = self.rhs.eval(&self.h, y)?;
        let t = lhs.trunc().min(rhs.trunc());
        Ok(lhs.agrees_with(&rhs, t) && initial_conditions_hold(&self.h, y, &self.init))
    }
}

fn initial_polynomial(h: &HSeries, init: &[Rat], trunc: usize) -> Series {
    Series::from_fn(trunc, |j| match init.get(j) {
        Some(y) => y / h.factorial(j),
        None => Rat::zero(),
    })
}

fn initial_conditions_hold(h: &HSeries, y: &Series, init: &[Rat]) -> bool {
    init.iter().enumerate().all(|(j, yj)| j <= y.trunc().min(h.trunc()) && y.coeff(j) * h.factorial(j) == *yj)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointSolution {
    pub solution: Series,
    /// Number of applications of `F`.
    pub iterations: usize,
    /// `F^0(s), F^1(s), …` at working precision.
    pub iterates: Vec<Series>,
}

/// Fixed point of `F` to `out_trunc`, iterating from the zero series.
pub fn solve_ivp_fixed_point(p: &IvProblem, out_trunc: usize) -> Result<FixedPointSolution> {
    let working = out_trunc + p.n;
    solve_ivp_fixed_point_from(p, out_trunc, &Series::zero(working))
}

/// Fixed point of `F` to `out_trunc`, iterating from `start`.
pub fn solve_ivp_fixed_point_from(p: &IvProblem, out_trunc: usize, start: &Series) -> Result<FixedPointSolution> {
    let working = out_trunc + p.n;
    if p.h.trunc() < working {
        return Err(WardError::PrecisionExhausted { needed: working, available: p.h.trunc() });
    }
    if start.trunc() < out_trunc {
        return Err(WardError::PrecisionExhausted { needed: out_trunc, available: start.trunc() });
    }
    let mut iterates = vec![start.truncate(working)];
    // m steps fix coefficients 0..m-1; one more step confirms.
    let cap = out_trunc + 2;
    for _ in 0..cap {
        let prev = iterates.last().expect("non-empty");
        let next = p.step(prev)?;
        if next.trunc() < out_trunc {
            return Err(WardError::PrecisionExhausted { needed: out_trunc, available: next.trunc() });
        }
        let settled = next.agrees_with(prev, out_trunc);
        iterates.push(next);
        if settled {
            let iterations = iterates.len() - 1;
            let solution = iterates[iterations].truncate(out_trunc);
            return Ok(FixedPointSolution { solution, iterations, iterates });
        }
    }
    Err(WardError::NotConverged(cap))
}

/// `D_h y = T(y) + q`, `y(0) = y_0`, with non-expansive `T`:
/// `y = Σ_k (I_h∘T)^k (y_0 + I_h(q))`.
pub fn solve_affine(h: &HSeries, t: &SeriesOperator, q: &Series, y0: &Rat, out_trunc: usize) -> Result<Series> {
    if t.order_shift() < 0 {
        return Err(WardError::NotNonExpansive { shift: t.order_shift() });
    }
    let seed = &Series::constant(y0.clone(), out_trunc) + &h.integral(q);
    let step = i_h(h).compose(t);
    let y = op_series_apply(&Series::geometric(out_trunc), &step, &seed)?;
    finish(y, out_trunc)
}

/// `D_h y = f(I_h)(y) + r`, `y(0) = y_0`: `y = (1/(1 - x f))(I_h)(y_0 + I_h(r))`.
pub fn solve_f_of_integral(h: &HSeries, f: &Series, r: &Series, y0: &Rat, out_trunc: usize) -> Result<Series> {
    let xf = f.mul_x();
    let denom = &Series::one(xf.trunc()) - &xf;
    let seed = &Series::constant(y0.clone(), out_trunc) + &h.integral(r);
    let y = op_series_apply(&denom.inverse()?, &i_h(h), &seed)?;
    finish(y, out_trunc)
}

fn finish(y: Series, out_trunc: usize) -> Result<Series> {
    if y.trunc() < out_trunc {
        return Err(WardError::PrecisionExhausted { needed: out_trunc, available: y.trunc() });
    }
    Ok(y.truncate(out_trunc))
}

/// `C(D_h) y = q` with `C(x) = x^n - Σ_{k<n} a_k x^k`, `a_0 ≠ 0`, and
/// `D_h^{(j)}(y)(0) = y_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharProblem {
    pub h: HSeries,
    pub a: Vec<Rat>,
    pub q: Series,
    pub init: Vec<Rat>,
}

impl CharProblem {
    pub fn new(h: HSeries, a: Vec<Rat>, q: Series, init: Vec<Rat>) -> Result<Self> {
        if a.is_empty() {
            return Err(WardError::InvalidParameter("equation order must be ≥ 1".into()));
        }
        if a[0].is_zero() {
            return Err(WardError::InvalidParameter("a_0 must be nonzero".into()));
        }
        if init.len() != a.len() {
            return Err(WardError::InvalidParameter(format!(
                "order {} needs {} initial values, got {}",
                a.len(),
                a.len(),
                init.len()
            )));
        }
        Ok(CharProblem { h, a, q, init })
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Coefficients of `C(x)`, constant term first.
    pub fn characteristic(&self) -> Vec<Rat> {
        let mut c: Vec<Rat> = self.a.iter().map(|ak| -ak).collect();
        c.push(Rat::one());
        c
    }

    /// Coefficients of `C*(x) = x^n C(1/x) = 1 - Σ a_k x^{n-k}`.
    pub fn reflected(&self) -> Vec<Rat> {
        let mut c = self.characteristic();
        c.reverse();
        c
    }

    /// The same problem as a general IVP with `G(y) = q + Σ a_k D_h^{(k)} y`.
    pub fn as_ivp(&self, trunc: usize) -> Result<IvProblem> {
        let p = self.a.iter().map(|ak| Series::constant(ak.clone(), trunc)).collect();
        IvProblem::new(self.h.clone(), self.order(), RhsSpec::LinearDh { q: self.q.clone(), p }, self.init.clone())
    }

    /// Checks `D_h^{(n)} y = Σ a_k D_h^{(k)} y + q` on the known prefix and
    /// all initial conditions.
    pub fn verify(&self, y: &Series) -> Result<bool> {
        let n = self.order();
        let lhs = self.h.derivative_n(y, n)?;
        let mut rhs = self.q.clone();
        let mut deriv = y.clone();
        for (k, ak) in self.a.iter().enumerate() {
            if k > 0 {
                deriv = self.h.derivative(&deriv)?;
            }
            rhs = &rhs + &deriv.scale(ak);
        }
        let t = lhs.trunc().min(rhs.trunc());
        Ok(lhs.agrees_with(&rhs, t) && initial_conditions_hold(&self.h, y, &self.init))
    }
}

/// Reduces the order-`n` problem to `D_h y = Σ_k a_k I_h^{(n-1-k)} y + r`
/// via `r_0 = q`, `r_j = y_{n-j} - Σ_{k=j}^{n-1} a_k y_{k-j} + I_h(r_{j-1})`.
pub fn heaviside_reduce(p: &CharProblem) -> Series {
    let n = p.order();
    let mut r = p.q.clone();
    for j in 1..n {
        let c = (j..n).fold(p.init[n - j].clone(), |acc, k| acc - &p.a[k] * &p.init[k - j]);
        let lifted = p.h.integral(&r);
        r = &Series::constant(c, lifted.trunc()) + &lifted;
    }
    r
}

/// `y = (1/C*)(I_h)(y_0 + I_h(r))`.
pub fn solve_heaviside(p: &CharProblem, out_trunc: usize) -> Result<Series> {
    let r = heaviside_reduce(p);
    let seed = &Series::constant(p.init[0].clone(), out_trunc) + &p.h.integral(&r);
    let inv = Series::polynomial(&p.reflected(), out_trunc).inverse()?;
    finish(op_series_apply(&inv, &i_h(&p.h), &seed)?, out_trunc)
}

/// Coefficientwise forward substitution: `[x^m] D_h^{(k)} y = c_{m+k} h_{m+1}⋯h_{m+k}`.
pub fn oracle_linear_solve(p: &CharProblem, out_trunc: usize) -> Result<Series> {
    let n = p.order();
    if p.h.trunc() < out_trunc {
        return Err(WardError::PrecisionExhausted { needed: out_trunc, available: p.h.trunc() });
    }
    if out_trunc >= n && p.q.trunc() < out_trunc - n {
        return Err(WardError::PrecisionExhausted { needed: out_trunc - n, available: p.q.trunc() });
    }
    let rising = |m: usize, k: usize| (m + 1..=m + k).fold(Rat::one(), |acc, i| acc * p.h.h(i));
    let mut c: Vec<Rat> = Vec::with_capacity(out_trunc + 1);
    for j in 0..=out_trunc {
        if j < n {
            c.push(&p.init[j] / p.h.factorial(j));
            continue;
        }
        let m = j - n;
        let mut s = p.q.coeff(m).clone();
        for (k, ak) in p.a.iter().enumerate() {
            s += ak * &c[m + k] * rising(m, k);
        }
        c.push(s / rising(m, n));
    }
    Ok(Series::new(c))
}

/// Decomposition `1/C*(x) = Σ_ℓ Σ_k B_{ℓ,k}/(1 - λ_ℓ x)^k`, also reported in
/// the form `(1/(-a_0)) Σ A_{ℓ,k}/(x - 1/λ_ℓ)^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialFractions {
    /// Distinct roots of `C` with multiplicities.
    pub roots: Vec<(Rat, usize)>,
    /// `A_{ℓ,k}` for `k = 1..=n_ℓ`.
    pub a: Vec<Vec<Rat>>,
    /// `B_{ℓ,k} = (-1)^{k+1} λ_ℓ^k A_{ℓ,k} / a_0`.
    pub b: Vec<Vec<Rat>>,
    /// Reassembly reproduces `1/C*` to the requested truncation.
    pub remainder_ok: bool,
}

/// Decomposes `1/C*` over Q. With `roots = None` the rational roots of `C`
/// are searched first.
pub fn partial_fractions(p: &CharProblem, roots: Option<&[(Rat, usize)]>, trunc: usize) -> Result<PartialFractions> {
    let c = p.characteristic();
    let roots = match roots {
        Some(r) => r.to_vec(),
        None => rational_roots(&c),
    };
    let product = roots
        .iter()
        .fold(vec![Rat::one()], |acc, (lambda, m)| (0..*m).fold(acc, |acc, _| poly_mul(&acc, &[-lambda, Rat::one()])));
    if roots.iter().any(|(_, m)| *m == 0) || product != c {
        return Err(WardError::RootsDontFactor);
    }

    let n = p.order();
    let one_minus =
        |lambda: &Rat, e: usize| (0..e).fold(vec![Rat::one()], |acc, _| poly_mul(&acc, &[Rat::one(), -lambda]));
    // Column (ℓ,k) holds the coefficients of C*(x)/(1 - λ_ℓ x)^k.
    let mut columns: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut index = Vec::with_capacity(n);
    for (l, (lambda, m)) in roots.iter().enumerate() {
        let others = roots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != l)
            .fold(vec![Rat::one()], |acc, (_, (mu, e))| poly_mul(&acc, &one_minus(mu, *e)));
        for k in 1..=*m {
            let mut col = poly_mul(&others, &one_minus(lambda, m - k));
            col.resize(n, Rat::zero());
            columns.push(col);
            index.push((l, k));
        }
    }
    let matrix: Vec<Vec<Rat>> = (0..n).map(|i| columns.iter().map(|col| col[i].clone()).collect()).collect();
    let mut rhs = vec![Rat::zero(); n];
    rhs[0] = Rat::one();
    let sol = solve_linear(matrix, rhs).ok_or(WardError::RootsDontFactor)?;

    let mut b: Vec<Vec<Rat>> = roots.iter().map(|(_, m)| vec![Rat::zero(); *m]).collect();
    for ((l, k), v) in index.into_iter().zip(sol) {
        b[l][k - 1] = v;
    }
    let a0 = &p.a[0];
    let a: Vec<Vec<Rat>> = roots
        .iter()
        .zip(&b)
        .map(|((lambda, _), bl)| {
            bl.iter()
                .enumerate()
                .map(|(i, bk)| {
                    let k = i as i64 + 1;
                    let sign = if k % 2 == 1 { rat(1) } else { rat(-1) };
                    bk * a0 * sign / pow(lambda, k)
                })
                .collect()
        })
        .collect();

    let mut pf = PartialFractions { roots, a, b, remainder_ok: false };
    let target = Series::polynomial(&p.reflected(), trunc).inverse()?;
    pf.remainder_ok = pf.reassemble(trunc)? == target;
    Ok(pf)
}

impl PartialFractions {
    /// `1/(1 - λx)^k` as a series.
    fn term(lambda: &Rat, k: usize, trunc: usize) -> Result<Series> {
        Series::polynomial(&[Rat::one(), -lambda], trunc).pow(k).inverse()
    }

    /// `Σ B_{ℓ,k}/(1 - λ_ℓ x)^k` to `trunc`.
    pub fn reassemble(&self, trunc: usize) -> Result<Series> {
        let mut acc = Series::zero(trunc);
        for ((lambda, _), bl) in self.roots.iter().zip(&self.b) {
            for (i, bk) in bl.iter().enumerate() {
                acc = &acc + &Self::term(lambda, i + 1, trunc)?.scale(bk);
            }
        }
        Ok(acc)
    }
}

/// Solution assembled root by root:
/// `Σ B_{ℓ,k} (1/(1 - λ_ℓ x)^k)(I_h) (y_0 + I_h(r))`.
pub fn solve_via_roots(p: &CharProblem, pf: &PartialFractions, out_trunc: usize) -> Result<Series> {
    let r = heaviside_reduce(p);
    let seed = &Series::constant(p.init[0].clone(), out_trunc) + &p.h.integral(&r);
    let integral = i_h(&p.h);
    let mut acc = Series::zero(out_trunc);
    for ((lambda, _), bl) in pf.roots.iter().zip(&pf.b) {
        for (i, bk) in bl.iter().enumerate() {
            let f = PartialFractions::term(lambda, i + 1, out_trunc)?;
            acc = &acc + &op_series_apply(&f, &integral, &seed)?.scale(bk);
        }
    }
    finish(acc, out_trunc)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Divides by `(x - root)`, returning the quotient when the remainder is 0.
fn deflate(poly: &[Rat], root: &Rat) -> Option<Vec<Rat>> {
    let deg = poly.len() - 1;
    let mut quotient = vec![Rat::zero(); deg];
    let mut carry = Rat::zero();
    for i in (0..=deg).rev() {
        let v = &poly[i] + &carry * root;
        if i == 0 {
            return v.is_zero().then_some(quotient);
        }
        quotient[i - 1] = v.clone();
        carry = v;
    }
    unreachable!()
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if n.is_multiple_of(&d) {
            let other = &n / &d;
            if other != d {
                large.push(other);
            }
            small.push(d.clone());
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Rational roots with multiplicity, by the rational root theorem.
/// `poly` is given constant term first and must have a nonzero constant term.
pub fn rational_roots(poly: &[Rat]) -> Vec<(Rat, usize)> {
    let lcm = poly.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = poly.iter().map(|c| (c * int(&lcm)).to_integer()).collect();
    let (Some(lead), Some(constant)) = (ints.last(), ints.first()) else {
        return Vec::new();
    };
    if constant.is_zero() || lead.is_zero() {
        return Vec::new();
    }
    let mut remaining = poly.to_vec();
    let mut found = Vec::new();
    for p in divisors(constant) {
        for q in divisors(lead) {
            for candidate in [Rat::new(p.clone(), q.clone()), Rat::new(-p.clone(), q.clone())] {
                if found.iter().any(|(r, _)| *r == candidate) {
                    continue;
                }
                let mut mult = 0;
                while remaining.len() > 1 {
                    match deflate(&remaining, &candidate) {
                        Some(qt) => {
                            remaining = qt;
                            mult += 1;
                        }
                        None => break,
                    }
                }
                if mult > 0 {
                    found.push((candidate, mult));
                }
            }
        }
    }
    found
}

/// Exact Gaussian elimination; `None` when the system is singular.
pub fn solve_linear(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = m[col][col].recip();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            let pivot_row = m[col].clone();
            for (x, p) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                *x -= &factor * p;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}
