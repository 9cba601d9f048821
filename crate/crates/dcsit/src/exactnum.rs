//! Exact integer/rational arithmetic and combinatorial primitives.
//!
//! Everything downstream (DoF formulas, schedule coefficients) is computed
//! over [`BigRational`], so no rounding ever occurs; floats appear only at
//! CSV-emission time via [`to_f64`]. The combinatorial conventions matter and
//! are pinned here:
//!
//! - `binomial(n, k) = 0` when `k > n`, `1` when `k = 0`;
//! - `lcm_all([]) = 1` (empty-product convention);
//! - `compositions(p, r)` enumerates ordered positive `r`-tuples summing to
//!   `p` in lexicographic order, empty when `r > p` or `r = 0`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact rational number, stored reduced with a positive denominator.
pub type BigRational = num_rational::BigRational;

/// Convenience constructor: the exact rational `n / d`.
///
/// Panics if `d == 0`; intended for literals in code and tests.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The exact integer `n` as a rational.
pub fn integer(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Reduce the fraction `a / b` to lowest terms.
///
/// Returns `(a/g, b/g)` where `g = gcd(a, b)`; the reduced denominator stays
/// positive. `b = 0` is an invalid argument.
pub fn reduce(a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt)> {
    if b.is_zero() {
        return Err(Error::InvalidArgument("reduce: zero denominator".into()));
    }
    if a.is_zero() {
        return Ok((BigInt::zero(), BigInt::one()));
    }
    let g = a.gcd(b);
    let (mut num, mut den) = (a / &g, b / &g);
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    Ok((num, den))
}

/// Exact binomial coefficient `C(n, k)`.
///
/// `0` when `k > n`, `1` when `k = 0`. Computed by the multiplicative
/// formula with exact division at every step.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    // C(n, k) = C(n, n - k); use the smaller side.
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Least common multiple of a list of positive integers.
///
/// The empty list yields `1` (empty-product convention), which is what makes
/// the smallest schedules come out with scaling factor 1.
pub fn lcm_all(values: &[BigInt]) -> Result<BigInt> {
    let mut acc = BigInt::one();
    for v in values {
        if !v.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "lcm_all: nonpositive element {v}"
            )));
        }
        acc = acc.lcm(v);
    }
    Ok(acc)
}

/// An ordered tuple of positive integers `(g_1, ..., g_r)` summing to `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    parts: Vec<u64>,
}

impl Composition {
    /// The ordered parts.
    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Sum of the parts.
    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }
}

/// All ordered `r`-tuples of positive integers summing to `p`, in
/// lexicographic order. Empty when `r > p` or `r = 0`.
///
/// There are exactly `C(p-1, r-1)` of them (stars and bars).
pub fn compositions(p: u64, r: u64) -> Vec<Composition> {
    let mut out = Vec::new();
    if r == 0 || r > p {
        return out;
    }
    let mut parts = vec![0u64; r as usize];
    fill_compositions(p, r, 0, &mut parts, &mut out);
    out
}

fn fill_compositions(
    remaining: u64,
    slots: u64,
    idx: usize,
    parts: &mut [u64],
    out: &mut Vec<Composition>,
) {
    if slots == 1 {
        parts[idx] = remaining;
        out.push(Composition {
            parts: parts.to_vec(),
        });
        return;
    }
    // Each part is at least 1 and must leave at least slots-1 behind.
    for g in 1..=(remaining - (slots - 1)) {
        parts[idx] = g;
        fill_compositions(remaining - g, slots - 1, idx + 1, parts, out);
    }
}

/// Convert an exact rational to the nearest `f64`.
///
/// The quotient is computed as `(|num| << 60) / den` in exact integer
/// arithmetic before the single conversion to float, so gigantic numerators
/// and denominators (harmonic sums at K = 200 and beyond) never overflow on
/// the way through.
pub fn to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let scaled = (x.numer().abs() << 60u32) / x.denom();
    let magnitude = scaled.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(60);
    match x.numer().sign() {
        Sign::Minus => -magnitude,
        _ => magnitude,
    }
}
