#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use ward::rat::Rat;
use ward::{HSeries, Series};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rand_rat(rng: &mut StdRng) -> Rat {
    Rat::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into())
}

pub fn rand_nonzero_rat(rng: &mut StdRng) -> Rat {
    loop {
        let r = rand_rat(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

pub fn rand_series(rng: &mut StdRng, trunc: usize) -> Series {
    Series::from_fn(trunc, |_| rand_rat(rng))
}

/// Random series whose low coefficients vanish with some probability, so
/// that orders and distances take varied values.
pub fn rand_series_sparse(rng: &mut StdRng, trunc: usize) -> Series {
    let lead = rng.gen_range(0..=trunc / 2);
    Series::from_fn(trunc, |k| if k < lead { Rat::zero() } else { rand_rat(rng) })
}

pub fn rand_h(rng: &mut StdRng, trunc: usize) -> HSeries {
    HSeries::new(Series::from_fn(trunc, |k| if k == 0 { Rat::zero() } else { rand_nonzero_rat(rng) }))
        .expect("nonzero coefficients")
}

/// `h_1 ⋯ h_k` computed by a plain running product.
pub fn h_factorials(h: &HSeries, upto: usize) -> Vec<Rat> {
    let mut out = vec![Rat::one()];
    for k in 1..=upto {
        let next = &out[k - 1] * h.h(k);
        out.push(next);
    }
    out
}

pub fn fib(n: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let c = &a + &b;
        a = b;
        b = c;
    }
    a
}

pub fn fact(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

pub fn arb_rat() -> impl Strategy<Value = Rat> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| Rat::new(n.into(), d.into()))
}

pub fn arb_nonzero_rat() -> impl Strategy<Value = Rat> {
    arb_rat().prop_filter("nonzero", |r| !r.is_zero())
}

pub fn arb_series(trunc: usize) -> impl Strategy<Value = Series> {
    prop::collection::vec(arb_rat(), trunc + 1).prop_map(Series::new)
}

/// Series with a random number of leading zeros.
pub fn arb_sparse_series(trunc: usize) -> impl Strategy<Value = Series> {
    (arb_series(trunc), 0..=trunc).prop_map(move |(s, lead)| {
        let mut c = s.into_coeffs();
        for x in c.iter_mut().take(lead) {
            *x = Rat::zero();
        }
        Series::new(c)
    })
}

pub fn arb_h(trunc: usize) -> impl Strategy<Value = HSeries> {
    prop::collection::vec(arb_nonzero_rat(), trunc).prop_map(|mut c| {
        c.insert(0, Rat::zero());
        HSeries::new(Series::new(c)).unwrap()
    })
}
