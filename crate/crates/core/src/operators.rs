//! Ward derivative and integral, operator power series, and the operator
//! ultrametric.
//!
//! `D_h(x^n) = h_n x^{n-1}` and `I_h(x^n) = x^{n+1}/h_{n+1}`. With
//! `h = x/(1-x)^2` (`h_n = n`) this is the classical derivative, with
//! `h = x/(1-x)` (`h_n = 1`) the 0-Jackson derivative `D_0`.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Result, WardError};
use crate::rat::{rat, Rat};
use crate::series::{half_pow, Order, Series};

/// A series `h` with `h_0 = 0` and `h_k ≠ 0` for `1 ≤ k ≤ trunc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSeries {
    base: Series,
}

impl HSeries {
    pub fn new(base: Series) -> Result<Self> {
        if !base.coeff(0).is_zero() {
            return Err(WardError::InvalidH { index: 0, reason: "must be zero" });
        }
        if let Some(k) = (1..=base.trunc()).find(|&k| base.coeff(k).is_zero()) {
            return Err(WardError::InvalidH { index: k, reason: "vanishes" });
        }
        Ok(HSeries { base })
    }

    /// `h_n = n`, i.e. `h = x/(1-x)^2`: the classical derivative.
    pub fn classical(trunc: usize) -> Self {
        HSeries { base: Series::from_fn(trunc, |k| rat(k as i64)) }
    }

    /// `h_n = 1`, i.e. `h = x/(1-x)`: the 0-Jackson derivative.
    pub fn jackson0(trunc: usize) -> Self {
        HSeries { base: Series::from_fn(trunc, |k| if k == 0 { Rat::zero() } else { Rat::one() }) }
    }

    pub fn series(&self) -> &Series {
        &self.base
    }

    pub fn trunc(&self) -> usize {
        self.base.trunc()
    }

    /// `h_k`; panics past the truncation.
    pub fn h(&self, k: usize) -> &Rat {
        self.base.coeff(k)
    }

    pub fn truncate(&self, t: usize) -> HSeries {
        HSeries { base: self.base.truncate(t) }
    }

    /// `h_1 h_2 ⋯ h_k` (empty product is 1).
    pub fn factorial(&self, k: usize) -> Rat {
        (1..=k).fold(Rat::one(), |acc, i| acc * self.h(i))
    }

    /// `D_h(s)`; the result knows one coefficient fewer than `min(s, h)`.
    pub fn derivative(&self, s: &Series) -> Result<Series> {
        let t = s.trunc().min(self.trunc());
        if t == 0 {
            return Err(WardError::PrecisionExhausted { needed: 1, available: 0 });
        }
        Ok(Series::from_fn(t - 1, |k| self.h(k + 1) * s.coeff(k + 1)))
    }

    /// `D_h^{(n)}(s)`.
    pub fn derivative_n(&self, s: &Series, n: usize) -> Result<Series> {
        let mut acc = s.clone();
        for _ in 0..n {
            acc = self.derivative(&acc)?;
        }
        Ok(acc)
    }

    /// `I_h(s)`; constant term zero, truncation `min(s.trunc + 1, h.trunc)`.
    pub fn integral(&self, s: &Series) -> Series {
        let t = (s.trunc() + 1).min(self.trunc());
        Series::from_fn(t, |k| if k == 0 { Rat::zero() } else { s.coeff(k - 1) / self.h(k) })
    }

    pub fn integral_n(&self, s: &Series, n: usize) -> Series {
        (0..n).fold(s.clone(), |acc, _| self.integral(&acc))
    }
}

type Action = dyn Fn(&Series) -> Result<Series> + Send + Sync;

/// A linear map on truncated series together with a certified bound
/// `ω(T s) ≥ ω(s) + order_shift`.
#[derive(Clone)]
pub struct SeriesOperator {
    action: Arc<Action>,
    order_shift: i64,
}

impl fmt::Debug for SeriesOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesOperator").field("order_shift", &self.order_shift).finish()
    }
}

/// Verdict of [`classify_f_of_t`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorClass {
    Isometry,
    Contractive,
}

impl SeriesOperator {
    /// Wraps an action. The caller certifies both linearity and the shift.
    pub fn new(order_shift: i64, action: impl Fn(&Series) -> Result<Series> + Send + Sync + 'static) -> Self {
        SeriesOperator { action: Arc::new(action), order_shift }
    }

    pub fn identity() -> Self {
        SeriesOperator::new(0, |s| Ok(s.clone()))
    }

    /// The zero map. Any shift is valid for it; it is given shift 1.
    pub fn zero() -> Self {
        SeriesOperator::new(1, |s| Ok(Series::zero(s.trunc())))
    }

    pub fn order_shift(&self) -> i64 {
        self.order_shift
    }

    pub fn apply(&self, s: &Series) -> Result<Series> {
        (self.action)(s)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SeriesOperator) -> SeriesOperator {
        let (outer, inner_op) = (self.clone(), inner.clone());
        SeriesOperator::new(self.order_shift + inner.order_shift, move |s| outer.apply(&inner_op.apply(s)?))
    }

    pub fn add(&self, other: &SeriesOperator) -> SeriesOperator {
        let (a, b) = (self.clone(), other.clone());
        SeriesOperator::new(self.order_shift.min(other.order_shift), move |s| Ok(&a.apply(s)? + &b.apply(s)?))
    }

    pub fn sub(&self, other: &SeriesOperator) -> SeriesOperator {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, c: &Rat) -> SeriesOperator {
        let (a, c) = (self.clone(), c.clone());
        SeriesOperator::new(self.order_shift, move |s| Ok(a.apply(s)?.scale(&c)))
    }
}

/// The operator `D_h` (order shift −1).
pub fn d_h(h: &HSeries) -> SeriesOperator {
    let h = h.clone();
    SeriesOperator::new(-1, move |s| h.derivative(s))
}

/// The operator `I_h` (order shift +1).
pub fn i_h(h: &HSeries) -> SeriesOperator {
    let h = h.clone();
    SeriesOperator::new(1, move |s| Ok(h.integral(s)))
}

/// `D_0`, the 0-Jackson derivative.
pub fn d_0(trunc: usize) -> SeriesOperator {
    d_h(&HSeries::jackson0(trunc))
}

/// `f(T) = Σ f_n T^n` as an operator. Requires `T` to raise order by at least one.
pub fn op_series(f: &Series, t: &SeriesOperator) -> Result<SeriesOperator> {
    let delta = t.order_shift();
    if delta < 1 {
        return Err(WardError::NotContractive { shift: delta });
    }
    let shift = match f.order() {
        Order::At(w) => w as i64 * delta,
        Order::AboveTrunc => (f.trunc() as i64 + 1) * delta,
    };
    let (f, t) = (f.clone(), t.clone());
    Ok(SeriesOperator::new(shift, move |s| apply_series_of(&f, &t, s)))
}

/// `f(T)(s)`.
pub fn op_series_apply(f: &Series, t: &SeriesOperator, s: &Series) -> Result<Series> {
    op_series(f, t)?.apply(s)
}

fn apply_series_of(f: &Series, t: &SeriesOperator, s: &Series) -> Result<Series> {
    let delta = t.order_shift() as usize;
    let w = s.order().value().unwrap_or(s.trunc() + 1);
    // The unknown f_n (n > f.trunc) only touch coefficients ≥ (f.trunc+1)·δ + ω(s).
    let mut known = s.trunc().min((f.trunc() + 1) * delta + w - 1);
    let mut acc = s.truncate(known).scale(f.coeff(0));
    let mut term = s.clone();
    let mut n = 1;
    while n * delta + w <= known {
        term = t.apply(&term)?;
        known = known.min(term.trunc());
        acc = &acc.truncate(known) + &term.truncate(known).scale(f.coeff(n));
        n += 1;
    }
    Ok(acc)
}

/// Isometry iff `f(0) ≠ 0`, contractive iff `f(0) = 0`.
pub fn classify_f_of_t(f: &Series) -> OperatorClass {
    if f.coeff(0).is_zero() {
        OperatorClass::Contractive
    } else {
        OperatorClass::Isometry
    }
}

/// Estimate of `d*(T1, T2) = ‖T1 − T2‖` from monomial probes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpDistance {
    /// Some probe `x^witness` separates the operators: `value` is
    /// `2^{witness − ω((T1−T2)x^witness)}` maximised over probes, a lower
    /// bound on the supremum. `probe_dist` is the raw `d(T1 x^k, T2 x^k)`.
    AtLeast { value: Rat, witness: usize, probe_dist: Rat },
    /// No probe separates them; every probe difference is below `bound`.
    Vanishing { bound: Rat },
}

pub fn op_dist(t1: &SeriesOperator, t2: &SeriesOperator, probe_trunc: usize) -> Result<OpDistance> {
    let mut best: Option<(Rat, usize, Rat)> = None;
    let mut bound = Rat::zero();
    for k in 0..=probe_trunc {
        let probe = Series::monomial(k, Rat::one(), probe_trunc);
        let a = t1.apply(&probe)?;
        let b = t2.apply(&probe)?;
        let diff = &a.truncate(b.trunc()) - &b.truncate(a.trunc());
        match diff.order() {
            Order::At(w) => {
                let value = half_pow(w as i64 - k as i64);
                if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
                    best = Some((value, k, half_pow(w as i64)));
                }
            }
            Order::AboveTrunc => {
                let b = half_pow(diff.trunc() as i64 + 1);
                if b > bound {
                    bound = b;
                }
            }
        }
    }
    Ok(match best {
        Some((value, witness, probe_dist)) => OpDistance::AtLeast { value, witness, probe_dist },
        None => OpDistance::Vanishing { bound },
    })
}

/// `D_h(s) = D_0(h) ∗ D_0(s) = D_0(h ∗ s)` on the common truncation.
pub fn hadamard_derivative_identity_check(h: &HSeries, s: &Series) -> bool {
    let t = h.trunc().min(s.trunc());
    if t == 0 {
        return true;
    }
    let d0 = HSeries::jackson0(t);
    let (Ok(direct), Ok(dh0), Ok(ds0), Ok(dhs)) =
        (h.derivative(s), d0.derivative(h.series()), d0.derivative(s), d0.derivative(&h.series().hadamard(s)))
    else {
        return false;
    };
    let via_product = dh0.hadamard(&ds0);
    let u = t - 1;
    direct.agrees_with(&via_product, u) && direct.agrees_with(&dhs, u)
}

/// `I_h(D_h s) = s − s_0`.
pub fn barrow_check(h: &HSeries, s: &Series) -> bool {
    let Ok(ds) = h.derivative(s) else {
        return s.trunc() == 0 || h.trunc() == 0;
    };
    let lhs = h.integral(&ds);
    let mut rhs = s.clone();
    rhs = &rhs - &Series::constant(s.coeff(0).clone(), s.trunc());
    lhs.agrees_with(&rhs, lhs.trunc())
}

/// `D_h(I_h s) = s`.
pub fn ftc_check(h: &HSeries, s: &Series) -> bool {
    match h.derivative(&h.integral(s)) {
        Ok(lhs) => lhs.agrees_with(s, lhs.trunc()),
        Err(_) => h.trunc() == 0,
    }
}

/// `D_h(f·g) − f·D_h(g) − g·D_h(f)`.
pub fn leibniz_defect(h: &HSeries, f: &Series, g: &Series) -> Result<Series> {
    let fg = f * g;
    let lhs = h.derivative(&fg)?;
    let t = lhs.trunc();
    let dg = h.derivative(g)?;
    let df = h.derivative(f)?;
    let t = t.min(dg.trunc()).min(df.trunc());
    Ok(&(&lhs.truncate(t) - &(&f.truncate(t) * &dg.truncate(t))) - &(&g.truncate(t) * &df.truncate(t)))
}
