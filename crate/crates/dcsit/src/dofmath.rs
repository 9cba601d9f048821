//! Closed-form and recursive DoF expressions, evaluated exactly.
//!
//! Conventions: `K` is the total user count; in the multi-cell setting
//! `K = L * C` with `L` single-antenna users in each of `C` cells. All
//! functions return reduced [`BigRational`] values and never touch floats.
//!
//! The same quantity is deliberately computable along independent routes
//! (closed form, recursion chain, schedule slot-count ratio) so the routes
//! can be checked against each other; the identities are exercised in the
//! test suites rather than assumed.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactnum::{binomial, integer, BigRational};
use crate::{Error, Result};

/// Sum of reciprocals `1/1 + 1/2 + ... + 1/n`.
fn harmonic(n: u64) -> BigRational {
    let mut acc = BigRational::zero();
    for p in 1..=n {
        acc += BigRational::new(BigInt::one(), BigInt::from(p));
    }
    acc
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg.into()))
    }
}

/// No-CSIT interference-alignment baseline for `K` users with `m` antennas
/// each: every user gets half the cake, `K * m / 2`.
pub fn dof_cj(k: u64, m: u64) -> Result<BigRational> {
    require(k >= 1 && m >= 1, "dof_cj: K and m must be >= 1")?;
    Ok(BigRational::new(BigInt::from(k * m), BigInt::from(2u32)))
}

/// Full MAT DoF for the `K`-user MISO broadcast channel with delayed CSIT:
/// `K / (1 + 1/2 + ... + 1/K)`.
pub fn dof_mat(k: u64) -> Result<BigRational> {
    require(k >= 1, "dof_mat: K must be >= 1")?;
    Ok(big(k) / harmonic(k))
}

/// One step of the order-`p` DoF recursion:
/// `d_p = (K-p+1) C(K,p) / ( C(K,p) + p C(K,p+1) / d_{p+1} )`.
pub fn dof_order_p_mat(k: u64, p: u64, d_next: &BigRational) -> Result<BigRational> {
    require(p >= 1 && p < k, "dof_order_p_mat: requires 1 <= p < K")?;
    require(d_next.is_positive(), "dof_order_p_mat: d_next must be > 0")?;
    let ckp = BigRational::from_integer(binomial(k, p));
    let ckp1 = BigRational::from_integer(binomial(k, p + 1));
    Ok(big(k - p + 1) * &ckp / (&ckp + big(p) * ckp1 / d_next))
}

/// MAT truncated to `theta` phases: bootstrap `d_theta = 1` and chain the
/// order-`p` recursion down to `p = 1`. `theta = K` recovers [`dof_mat`];
/// `theta = 1` is TDMA (DoF 1).
pub fn dof_mat_truncated(k: u64, theta: u64) -> Result<BigRational> {
    require(
        (1..=k).contains(&theta),
        "dof_mat_truncated: requires 1 <= theta <= K",
    )?;
    let mut d = integer(1);
    for p in (1..theta).rev() {
        d = dof_order_p_mat(k, p, &d)?;
    }
    Ok(d)
}

/// Order-2 DoF of the HC scheme for the `K`-user MISO interference channel:
/// `1 / (1 - (1/(K-1)) * sum_{l=2..K-1} (K-l)/(l^2-1))`.
///
/// The sum is empty for `K = 2`, giving exactly 1.
pub fn dof_hc_order2(k: u64) -> Result<BigRational> {
    require(k >= 2, "dof_hc_order2: K must be >= 2")?;
    let mut sum = BigRational::zero();
    for l in 2..k {
        sum += BigRational::new(BigInt::from(k - l), BigInt::from(l * l - 1));
    }
    let inner = integer(1) - sum / big(k - 1);
    Ok(inner.recip())
}

/// HC scheme DoF: with `d2 = dof_hc_order2(K)`, the best integer group size
/// `n` near `2 d2` wins: `max over n in {floor(2 d2), ceil(2 d2)}` of
/// `n^2 / (1 + n(n-1)/d2)`.
///
/// Floor and ceiling are taken exactly on the rational `2 d2`, so tie cases
/// (integral `2 d2`) evaluate a single candidate deterministically.
pub fn dof_hc(k: u64) -> Result<BigRational> {
    let d2 = dof_hc_order2(k)?;
    let two_d2 = &d2 * big(2);
    let floor = two_d2.floor();
    let ceil = two_d2.ceil();
    let mut best: Option<BigRational> = None;
    for n in [floor, ceil] {
        let n = n.to_integer();
        if !n.is_positive() {
            continue;
        }
        let n = BigRational::from_integer(n);
        let value = &n * &n / (integer(1) + &n * (&n - integer(1)) / &d2);
        if best.as_ref().is_none_or(|b| value > *b) {
            best = Some(value);
        }
    }
    best.ok_or_else(|| Error::Numeric("dof_hc: no positive candidate".into()))
}

/// Repetition counts for all phases at once: entry `p - 1` holds `nu_p` for
/// `p = 1..=L`. The composition sum `S(p, r) = sum over ordered positive
/// (g_1..g_r) with sum p of prod_j C(L, g_j)` is evaluated by conditioning
/// on the first part, `S(p, r) = sum_g C(L, g) * S(p - g, r - 1)`, so the
/// whole table costs O(C * L^2) big-integer products instead of walking
/// every composition.
fn nu_table(l: u64, c: u64) -> Vec<BigInt> {
    let lu = l as usize;
    let binom: Vec<BigInt> = (0..=lu).map(|g| binomial(l, g as u64)).collect();
    let mut nu = vec![BigInt::zero(); lu];
    // s[p] = S(p, r) for the r of the current iteration; r = 1 seeds it.
    let mut s: Vec<BigInt> = (0..=lu)
        .map(|p| if p >= 1 { binom[p].clone() } else { BigInt::zero() })
        .collect();
    for r in 2..=c.min(l) as usize {
        let mut next = vec![BigInt::zero(); lu + 1];
        for p in r..=lu {
            let mut acc = BigInt::zero();
            for g in 1..p {
                acc += &binom[g] * &s[p - g];
            }
            next[p] = acc;
        }
        s = next;
        let coeff = binomial(c, r as u64);
        // Only interior phases repeat: 2 <= p <= L-1.
        for p in 2..lu {
            nu[p - 1] += &coeff * &s[p];
        }
    }
    nu
}

/// Number of repetition rounds in phase `p` of the uncoupled scheme for `C`
/// cells of `L` users: 0 for the first and last phase, otherwise
/// `sum_{r=2..min(p,C)} C(C,r) * sum over compositions (g_1..g_r) of p of
/// prod_j C(L, g_j)` — each way a served group can straddle `r` cells costs
/// one extra round per straddled combination.
pub fn nu_umat(p: u64, l: u64, c: u64) -> Result<BigInt> {
    require(l >= 1 && c >= 1, "nu_umat: L and C must be >= 1")?;
    require((1..=l).contains(&p), "nu_umat: requires 1 <= p <= L")?;
    if p == 1 || p == l {
        return Ok(BigInt::zero());
    }
    Ok(nu_table(l, c).swap_remove(p as usize - 1))
}

/// One step of the order-`p` recursion for the uncoupled multi-cell scheme:
/// `d_p = (K-p+1) C(K,p) / ( C(K,p) + nu_p + p C(K,p+1) / d_{p+1} )` with
/// `K = L * C` and `nu_p = nu_umat(p, L, C)`.
pub fn dof_order_p_umat(l: u64, c: u64, p: u64, d_next: &BigRational) -> Result<BigRational> {
    require(l >= 3, "dof_order_p_umat: requires L >= 3 (range 2 <= p <= L-1)")?;
    require(
        (2..=l - 1).contains(&p),
        "dof_order_p_umat: requires 2 <= p <= L-1",
    )?;
    require(d_next.is_positive(), "dof_order_p_umat: d_next must be > 0")?;
    let k = l * c;
    let ckp = BigRational::from_integer(binomial(k, p));
    let nu = BigRational::from_integer(nu_umat(p, l, c)?);
    let ckp1 = BigRational::from_integer(binomial(k, p + 1));
    Ok(big(k - p + 1) * &ckp / (&ckp + nu + big(p) * ckp1 / d_next))
}

/// Uncoupled-scheme DoF for `C` cells of `L` users, closed form:
/// `K / ( sum_{p=1..L} 1/p + (C-1) + sum_{p=2..L-1} nu_p / (p C(K,p)) )`.
///
/// For `C = 1` this reduces to [`dof_mat`]. The recursion route
/// [`dof_umat_by_recursion`] must agree exactly.
pub fn dof_umat(l: u64, c: u64) -> Result<BigRational> {
    require(l >= 1 && c >= 1, "dof_umat: L and C must be >= 1")?;
    let k = l * c;
    let nu = nu_table(l, c);
    let mut denom = harmonic(l) + big(c - 1);
    for p in 2..l {
        let nu_p = BigRational::from_integer(nu[p as usize - 1].clone());
        denom += nu_p / (big(p) * BigRational::from_integer(binomial(k, p)));
    }
    Ok(big(k) / denom)
}

/// Uncoupled-scheme DoF truncated to `theta` phases: bootstrap
/// `d_theta = 1`, chain [`dof_order_p_umat`] down to `p = 2`, and finish
/// with the order-1 step of the single-cell recursion (the order-1 phase
/// has no repetitions, so its step is the same expression).
///
/// `theta` may not exceed `L` when `C >= 2` (later phases lower the DoF);
/// for `C = 1` the bound is `K` and the value equals [`dof_mat_truncated`].
pub fn dof_umat_truncated(l: u64, c: u64, theta: u64) -> Result<BigRational> {
    require(l >= 1 && c >= 1, "dof_umat_truncated: L and C must be >= 1")?;
    if c == 1 {
        return dof_mat_truncated(l, theta);
    }
    require(
        (1..=l).contains(&theta),
        "dof_umat_truncated: requires 1 <= theta <= L for C >= 2",
    )?;
    let k = l * c;
    let mut d = integer(1);
    for p in (2..theta).rev() {
        d = dof_order_p_umat(l, c, p, &d)?;
    }
    if theta >= 2 {
        d = dof_order_p_mat(k, 1, &d)?;
    }
    Ok(d)
}

/// Uncoupled-scheme DoF via the full recursion chain from `d_L = 1`.
/// Exists as an independent route to the same value as [`dof_umat`].
pub fn dof_umat_by_recursion(l: u64, c: u64) -> Result<BigRational> {
    require(l >= 1 && c >= 1, "dof_umat_by_recursion: L and C must be >= 1")?;
    if c == 1 {
        return dof_mat_truncated(l, l);
    }
    dof_umat_truncated(l, c, l)
}

/// Two-cell closed form:
/// `L / ( sum_{p=1..L} 1/p - 1/(2L) - kappa(L) )` where `kappa` is the
/// product-sum of [`kappa`]. Equals `dof_umat(L, 2)` exactly.
///
/// The simplification that collapses the repetition sum into `-1/(2L) -
/// kappa(L)` uses `sum_{p=2..L-1} 1/p = H_{L-1} - 1`, which needs `L >= 2`;
/// the degenerate single-user-per-cell case falls back to the general
/// expression so that the identity holds on the whole domain.
pub fn dof_umat_c2_closed(l: u64) -> Result<BigRational> {
    require(l >= 1, "dof_umat_c2_closed: L must be >= 1")?;
    if l == 1 {
        return dof_umat(1, 2);
    }
    let denom = harmonic(l) - BigRational::new(BigInt::one(), BigInt::from(2 * l)) - kappa(l)?;
    Ok(big(l) / denom)
}

/// The gap kernel `kappa(L) = sum_{p=2..L-1} (1/p) prod_{j=0..p-1}
/// (L-j)/(2L-j)`; zero for `L <= 2`.
pub fn kappa(l: u64) -> Result<BigRational> {
    require(l >= 1, "kappa: L must be >= 1")?;
    let mut sum = BigRational::zero();
    let mut product = integer(1);
    // product over j = 0..p-1 of (L-j)/(2L-j), built incrementally in p.
    for p in 1..l {
        product *= BigRational::new(BigInt::from(l - (p - 1)), BigInt::from(2 * l - (p - 1)));
        if p >= 2 {
            sum += &product / big(p);
        }
    }
    Ok(sum)
}

/// DoF gap between the uncoupled multi-cell scheme and single-cell MAT with
/// the same per-cell user count: `dof_umat(L, C) - dof_mat(L)`. Zero when
/// `C = 1`.
pub fn gap_epsilon(l: u64, c: u64) -> Result<BigRational> {
    Ok(dof_umat(l, c)? - dof_mat(l)?)
}

/// Cooperative upper bound: all `C` cells pool their antennas and serve the
/// `K = L * C` users as one broadcast channel, `dof_mat(L * C)`.
pub fn dof_coop(l: u64, c: u64) -> Result<BigRational> {
    require(l >= 1 && c >= 1, "dof_coop: L and C must be >= 1")?;
    dof_mat(l * c)
}

/// Time-sharing transform: activating `Q` of the `C` cells at a time leaves
/// the DoF untouched and multiplies the slot count by `C(C, Q)`.
pub fn timeshare(d: &BigRational, tau: u64, c: u64, q: u64) -> Result<(BigRational, u64)> {
    require(q >= 1 && q <= c, "timeshare: requires 1 <= Q <= C")?;
    let multiplier = binomial(c, q);
    let scaled = BigRational::from_integer(BigInt::from(tau)) * BigRational::from_integer(multiplier);
    let scaled = scaled.to_integer();
    let tau_scaled = u64::try_from(&scaled)
        .map_err(|_| Error::Numeric(format!("timeshare: scaled tau {scaled} exceeds u64")))?;
    Ok((d.clone(), tau_scaled))
}
