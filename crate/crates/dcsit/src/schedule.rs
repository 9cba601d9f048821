//! Transmission-schedule construction for the uncoupled multi-cell scheme
//! (and its `C = 1` single-cell specialization).
//!
//! A schedule for `C` cells of `L` users, truncated to `theta` phases,
//! consists of `R_p` rounds per phase, each `S_p` slots long. The slot
//! counts come from the exact coefficients `alpha_p / beta_p` of the DoF
//! recursion unfolding, cleared to integers by the smallest factor `lambda`:
//!
//! - `S_1 = lambda`, `S_p = (alpha_p / beta_p) * lambda` reduced exactly;
//! - `R_p = C(K, p) + nu_p`, where `nu_p` counts the repetition rounds that
//!   keep cross-cell interference uncoupled (zero in the first and last
//!   phase, and everywhere when `C = 1`);
//! - every user ends up with `b` symbols, `b = K * lambda` (for a one-phase
//!   schedule, plain TDMA, `b = lambda`).
//!
//! The headline identity `K * b / tau = DoF` ties the slot counts back to
//! the formula layer; [`consistency_check`] asserts it exactly.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dofmath::{dof_umat_truncated, nu_umat};
use crate::exactnum::{binomial, reduce, BigRational};
use crate::{Error, Result};

/// Cell that user `j` belongs to, with users numbered `1..=K` in blocks of
/// `L` per cell: `ceil(j / L)`.
pub fn cell_of(j: u64, l: u64) -> Result<u64> {
    if j == 0 || l == 0 {
        return Err(Error::InvalidArgument(
            "cell_of: user id and L must be >= 1".into(),
        ));
    }
    Ok(j.div_ceil(l))
}

/// Recursion-unfolding coefficients for a `theta`-phase schedule over `K`
/// users, `2 <= theta <= K`:
///
/// - `alpha_p = (p-1)!` for `p < theta`, and `alpha_theta = (theta-1) *
///   alpha_{theta-1}` (the closing phase absorbs one extra factor);
/// - `beta_1 = 1`, `beta_p = (K-1)(K-2)...(K-p+1)` for `p < theta`, and
///   `beta_theta = beta_{theta-1}`.
pub fn alpha_beta(k: u64, theta: u64) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    if !(2..=k).contains(&theta) {
        return Err(Error::InvalidArgument(
            "alpha_beta: requires 2 <= theta <= K".into(),
        ));
    }
    let mut alpha = Vec::with_capacity(theta as usize);
    let mut beta = Vec::with_capacity(theta as usize);
    for p in 1..theta {
        let mut a = BigInt::one();
        for j in 1..p {
            a *= BigInt::from(j);
        }
        let mut b = BigInt::one();
        for j in 1..p {
            b *= BigInt::from(k - j);
        }
        alpha.push(a);
        beta.push(b);
    }
    alpha.push(BigInt::from(theta - 1) * &alpha[theta as usize - 2]);
    beta.push(beta[theta as usize - 2].clone());
    Ok((alpha, beta))
}

/// Smallest integer factor clearing every per-phase slot ratio: the lcm of
/// the reduced denominators of `alpha_p / beta_p` over `p = 2..theta-1`.
/// `1` when `theta <= 2` (empty lcm).
pub fn lambda_factor(k: u64, theta: u64) -> Result<BigInt> {
    if theta <= 2 {
        return Ok(BigInt::one());
    }
    let (alpha, beta) = alpha_beta(k, theta)?;
    let mut denominators = Vec::new();
    for p in 2..theta {
        let idx = p as usize - 1;
        let (_, den) = reduce(&alpha[idx], &beta[idx])?;
        denominators.push(den);
    }
    crate::exactnum::lcm_all(&denominators)
}

/// Complete per-phase schedule parameters for `(L, C, theta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    /// Users per cell.
    pub l: u64,
    /// Number of cells.
    pub c: u64,
    /// Total users, `L * C`.
    pub k: u64,
    /// Number of phases.
    pub theta: u64,
    /// Slot-clearing factor lambda.
    pub lambda: BigInt,
    /// Symbols per user.
    pub b: BigInt,
    /// Rounds per phase, `R_p = C(K,p) + nu_p` (index 0 is phase 1).
    pub r: Vec<BigInt>,
    /// Slots per round of each phase.
    pub s: Vec<BigInt>,
    /// Repetition rounds per phase.
    pub nu: Vec<BigInt>,
    /// Phase durations `tau_p = R_p * S_p`.
    pub tau_p: Vec<BigInt>,
    /// Total slots.
    pub tau: BigInt,
}

/// Build the schedule parameters for `C` cells of `L` users truncated to
/// `theta` phases. `theta` ranges over `1..=K` when `C = 1` and `1..=L`
/// when `C >= 2`.
pub fn schedule_params(l: u64, c: u64, theta: u64) -> Result<SchemeParams> {
    if l == 0 || c == 0 {
        return Err(Error::InvalidArgument(
            "schedule_params: L and C must be >= 1".into(),
        ));
    }
    let k = l * c;
    let theta_max = if c == 1 { k } else { l };
    if !(1..=theta_max).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "schedule_params: theta must lie in 1..={theta_max} for (L={l}, C={c})"
        )));
    }

    if theta == 1 {
        // Plain TDMA: one round per user, one slot each, one symbol per user.
        let r = vec![BigInt::from(k)];
        let s = vec![BigInt::one()];
        let nu = vec![BigInt::zero()];
        let tau_p = vec![BigInt::from(k)];
        return Ok(SchemeParams {
            l,
            c,
            k,
            theta,
            lambda: BigInt::one(),
            b: BigInt::one(),
            r,
            s,
            nu,
            tau_p,
            tau: BigInt::from(k),
        });
    }

    let (alpha, beta) = alpha_beta(k, theta)?;
    let lambda = lambda_factor(k, theta)?;
    let mut r = Vec::with_capacity(theta as usize);
    let mut s = Vec::with_capacity(theta as usize);
    let mut nu = Vec::with_capacity(theta as usize);
    let mut tau_p = Vec::with_capacity(theta as usize);
    let mut tau = BigInt::zero();
    for p in 1..=theta {
        let idx = p as usize - 1;
        let slots = if p == 1 {
            lambda.clone()
        } else {
            let (num, den) = reduce(&alpha[idx], &beta[idx])?;
            let scaled = num * &lambda;
            let (q, rem) = num_integer::Integer::div_rem(&scaled, &den);
            if !rem.is_zero() {
                return Err(Error::Consistency(format!(
                    "schedule_params: lambda does not clear the phase-{p} slot ratio"
                )));
            }
            q
        };
        // Repetitions: only interior phases repeat; the closing phase's
        // overheard interference is never retransmitted, so it needs none.
        let reps = if p < theta && c >= 2 {
            nu_umat(p, l, c)?
        } else {
            BigInt::zero()
        };
        let rounds = binomial(k, p) + &reps;
        let phase_slots = &rounds * &slots;
        if !slots.is_positive() {
            return Err(Error::Consistency(format!(
                "schedule_params: nonpositive S_{p}"
            )));
        }
        tau += &phase_slots;
        r.push(rounds);
        s.push(slots);
        nu.push(reps);
        tau_p.push(phase_slots);
    }
    let b = BigInt::from(k) * &lambda;
    Ok(SchemeParams {
        l,
        c,
        k,
        theta,
        lambda,
        b,
        r,
        s,
        nu,
        tau_p,
        tau,
    })
}

/// The achieved-DoF identity `K * b / tau`, asserted against the formula
/// layer: the truncated uncoupled-scheme DoF (which specializes to the
/// truncated single-cell value when `C = 1`). Returns the common value.
pub fn consistency_check(params: &SchemeParams) -> Result<BigRational> {
    let achieved = BigRational::new(BigInt::from(params.k) * &params.b, params.tau.clone());
    let formula = dof_umat_truncated(params.l, params.c, params.theta)?;
    if achieved != formula {
        return Err(Error::Consistency(format!(
            "K*b/tau = {achieved} disagrees with the formula value {formula} \
             at (L={}, C={}, theta={})",
            params.l, params.c, params.theta
        )));
    }
    Ok(achieved)
}

/// One pass of a round: the set of base stations transmitting together for
/// the round's `S_p` slots. Single-element for every round except the
/// closing phase's cross-cell rounds, where the involved cells transmit
/// simultaneously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pass {
    /// Active cells, ascending.
    pub cells: Vec<u64>,
}

/// One scheduled round: the served user group and its transmission pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    /// Phase number, 1-based.
    pub phase: u64,
    /// Served user ids, ascending.
    pub served: Vec<u64>,
    /// Transmission passes (always a single pass for `C <= 2`).
    pub passes: Vec<Pass>,
    /// For a repetition round, the index (into the full round list) of the
    /// base round it repeats.
    pub repetition_of: Option<usize>,
}

/// All `p`-element subsets of `{1..=k}` in lexicographic order.
pub fn k_subsets(k: u64, p: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    if p == 0 || p > k {
        return out;
    }
    let mut current = Vec::with_capacity(p as usize);
    fn rec(start: u64, k: u64, remaining: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for next in start..=(k - remaining + 1) {
            current.push(next);
            rec(next + 1, k, remaining - 1, current, out);
            current.pop();
        }
    }
    rec(1, k, p, &mut current, &mut out);
    out
}

/// Sorted distinct cells spanned by a served group.
fn spanned_cells(served: &[u64], l: u64) -> Result<Vec<u64>> {
    let mut cells: Vec<u64> = Vec::new();
    for &j in served {
        let c = cell_of(j, l)?;
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    cells.sort_unstable();
    Ok(cells)
}

/// Materialize the full round list for a schedule, in execution order:
/// phases ascending, served groups in lexicographic order, each cross-cell
/// group of an interior phase immediately followed by its repetition round.
///
/// Supported for `C <= 2`; for more cells the repetition bookkeeping for
/// groups spanning three or more cells is deliberately not generated.
pub fn enumerate_rounds(params: &SchemeParams) -> Result<Vec<RoundPlan>> {
    if params.c > 2 {
        return Err(Error::InvalidArgument(
            "enumerate_rounds: round enumeration is supported for C <= 2 only".into(),
        ));
    }
    let mut rounds = Vec::new();
    for p in 1..=params.theta {
        for served in k_subsets(params.k, p) {
            let cells = spanned_cells(&served, params.l)?;
            let interior = p >= 2 && p < params.theta;
            if interior && cells.len() == 2 {
                // Base round for the lower cell, then one repetition giving
                // the other base station its exclusive pass.
                let base_index = rounds.len();
                rounds.push(RoundPlan {
                    phase: p,
                    served: served.clone(),
                    passes: vec![Pass {
                        cells: vec![cells[0]],
                    }],
                    repetition_of: None,
                });
                rounds.push(RoundPlan {
                    phase: p,
                    served,
                    passes: vec![Pass {
                        cells: vec![cells[1]],
                    }],
                    repetition_of: Some(base_index),
                });
            } else {
                // Single-cell groups everywhere, every phase-1 round, and
                // every closing-phase round: one pass. A closing-phase
                // cross-cell round activates all its cells at once.
                rounds.push(RoundPlan {
                    phase: p,
                    served,
                    passes: vec![Pass { cells }],
                    repetition_of: None,
                });
            }
        }
    }
    Ok(rounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dofmath::{dof_mat, dof_mat_truncated, dof_umat};
    use crate::exactnum::rational;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn cell_of_fixtures() {
        assert_eq!(cell_of(1, 3).unwrap(), 1);
        assert_eq!(cell_of(3, 3).unwrap(), 1);
        assert_eq!(cell_of(4, 3).unwrap(), 2);
        assert_eq!(cell_of(6, 3).unwrap(), 2);
        assert_eq!(cell_of(5, 2).unwrap(), 3);
        assert!(cell_of(0, 3).is_err());
    }

    #[test]
    fn alpha_beta_fixtures() {
        let (a, b) = alpha_beta(6, 3).unwrap();
        assert_eq!(a, ints(&[1, 1, 2]));
        assert_eq!(b, ints(&[1, 5, 5]));
        let (a, b) = alpha_beta(4, 2).unwrap();
        assert_eq!(a, ints(&[1, 1]));
        assert_eq!(b, ints(&[1, 1]));
        let (a, b) = alpha_beta(6, 4).unwrap();
        assert_eq!(a, ints(&[1, 1, 2, 6]));
        assert_eq!(b, ints(&[1, 5, 20, 20]));
        // alpha_2 / beta_2 = 1/(K-1) for any K.
        for k in 3..=20 {
            let (a, b) = alpha_beta(k, 3).unwrap();
            assert_eq!(&b[1], &BigInt::from(k - 1));
            assert_eq!(&a[1], &BigInt::one());
        }
        assert!(alpha_beta(6, 1).is_err());
        assert!(alpha_beta(6, 7).is_err());
    }

    #[test]
    fn lambda_fixtures() {
        assert_eq!(lambda_factor(6, 3).unwrap(), BigInt::from(5));
        assert_eq!(lambda_factor(4, 2).unwrap(), BigInt::one());
        assert_eq!(lambda_factor(6, 4).unwrap(), BigInt::from(10));
        assert_eq!(lambda_factor(9, 2).unwrap(), BigInt::one());
    }

    #[test]
    fn six_user_three_phase_fixture() {
        let p = schedule_params(6, 1, 3).unwrap();
        assert_eq!(p.k, 6);
        assert_eq!(p.lambda, BigInt::from(5));
        assert_eq!(p.b, BigInt::from(30));
        assert_eq!(p.r, ints(&[6, 15, 20]));
        assert_eq!(p.s, ints(&[5, 1, 2]));
        assert_eq!(p.nu, ints(&[0, 0, 0]));
        assert_eq!(p.tau_p, ints(&[30, 15, 40]));
        assert_eq!(p.tau, BigInt::from(85));
        assert_eq!(consistency_check(&p).unwrap(), rational(36, 17));
    }

    #[test]
    fn two_cell_fixtures() {
        let p = schedule_params(2, 2, 2).unwrap();
        assert_eq!(p.lambda, BigInt::one());
        assert_eq!(p.b, BigInt::from(4));
        assert_eq!(p.r, ints(&[4, 6]));
        assert_eq!(p.s, ints(&[1, 1]));
        assert_eq!(p.tau, BigInt::from(10));
        assert_eq!(consistency_check(&p).unwrap(), rational(8, 5));

        let p = schedule_params(3, 2, 3).unwrap();
        assert_eq!(p.lambda, BigInt::from(5));
        assert_eq!(p.b, BigInt::from(30));
        assert_eq!(p.r, ints(&[6, 24, 20]));
        assert_eq!(p.s, ints(&[5, 1, 2]));
        assert_eq!(p.nu, ints(&[0, 9, 0]));
        assert_eq!(p.tau, BigInt::from(94));
        assert_eq!(consistency_check(&p).unwrap(), rational(90, 47));

        // Hand-unfolded: K = 8, nu_2 = 16, lambda = 7.
        let p = schedule_params(4, 2, 3).unwrap();
        assert_eq!(p.lambda, BigInt::from(7));
        assert_eq!(p.b, BigInt::from(56));
        assert_eq!(p.r, ints(&[8, 44, 56]));
        assert_eq!(p.s, ints(&[7, 1, 2]));
        assert_eq!(p.tau, BigInt::from(212));
        assert_eq!(consistency_check(&p).unwrap(), rational(112, 53));
    }

    #[test]
    fn one_phase_schedule_is_tdma() {
        for (l, c) in [(4, 1), (2, 2), (3, 2), (1, 5)] {
            let p = schedule_params(l, c, 1).unwrap();
            assert_eq!(p.b, BigInt::one());
            assert_eq!(p.tau, BigInt::from(p.k));
            assert_eq!(consistency_check(&p).unwrap(), rational(1, 1));
        }
    }

    #[test]
    fn theta_bounds_enforced() {
        assert!(schedule_params(3, 2, 4).is_err());
        assert!(schedule_params(3, 2, 0).is_err());
        assert!(schedule_params(6, 1, 7).is_err());
        // C = 1 allows theta up to K.
        assert!(schedule_params(6, 1, 6).is_ok());
    }

    #[test]
    fn consistency_sweep_single_cell() {
        for k in 1..=12u64 {
            for theta in 1..=k {
                let p = schedule_params(k, 1, theta).unwrap();
                let dof = consistency_check(&p).unwrap();
                assert_eq!(dof, dof_mat_truncated(k, theta).unwrap());
                if theta == k {
                    assert_eq!(dof, dof_mat(k).unwrap());
                }
            }
        }
    }

    #[test]
    fn consistency_sweep_multi_cell() {
        for l in 1..=10u64 {
            for c in 2..=5u64 {
                let p = schedule_params(l, c, l).unwrap();
                assert_eq!(consistency_check(&p).unwrap(), dof_umat(l, c).unwrap());
            }
        }
    }

    #[test]
    fn slot_counts_are_positive_integers_and_s1_is_lambda() {
        for l in 1..=10u64 {
            for c in 1..=4u64 {
                let theta_max = if c == 1 { l } else { l };
                for theta in 1..=theta_max {
                    let p = schedule_params(l, c, theta).unwrap();
                    assert_eq!(p.s[0], if theta == 1 { BigInt::one() } else { p.lambda.clone() });
                    for (i, s) in p.s.iter().enumerate() {
                        assert!(s.is_positive(), "S_{} not positive", i + 1);
                    }
                    let total: BigInt = p.tau_p.iter().sum();
                    assert_eq!(total, p.tau);
                    for i in 0..p.r.len() {
                        assert_eq!(&p.r[i] * &p.s[i], p.tau_p[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn per_user_symbol_accounting() {
        // Every user is served in C(K-1, p-1) groups of phase p and gains
        // S_p fresh combinations per served group; the total is b.
        for l in 1..=8u64 {
            for c in 1..=3u64 {
                let theta_max = if c == 1 { l * c } else { l };
                for theta in 1..=theta_max {
                    let p = schedule_params(l, c, theta).unwrap();
                    let mut acquired = BigInt::zero();
                    for phase in 1..=theta {
                        acquired += binomial(p.k - 1, phase - 1) * &p.s[phase as usize - 1];
                    }
                    assert_eq!(
                        acquired, p.b,
                        "per-user accounting at (L={l}, C={c}, theta={theta})"
                    );
                }
            }
        }
    }

    #[test]
    fn k_subsets_lexicographic() {
        let subs = k_subsets(4, 2);
        assert_eq!(
            subs,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert_eq!(k_subsets(6, 3).len(), 20);
        assert!(k_subsets(3, 4).is_empty());
        for w in k_subsets(7, 3).windows(2) {
            assert!(w[0] < w[1], "subset order violated");
        }
    }

    #[test]
    fn round_enumeration_single_cell() {
        let params = schedule_params(6, 1, 3).unwrap();
        let rounds = enumerate_rounds(&params).unwrap();
        for (i, phase_rounds) in params.r.iter().enumerate() {
            let count = rounds.iter().filter(|r| r.phase == i as u64 + 1).count();
            assert_eq!(BigInt::from(count), *phase_rounds, "phase {} count", i + 1);
        }
        // Phase 1 serves users 1..6 in order, one pass each.
        let phase1: Vec<_> = rounds.iter().filter(|r| r.phase == 1).collect();
        for (i, round) in phase1.iter().enumerate() {
            assert_eq!(round.served, vec![i as u64 + 1]);
            assert_eq!(round.passes.len(), 1);
            assert!(round.repetition_of.is_none());
        }
    }

    #[test]
    fn round_enumeration_two_cells() {
        // (2,2,2): closing phase, so no repetitions even across cells.
        let params = schedule_params(2, 2, 2).unwrap();
        let rounds = enumerate_rounds(&params).unwrap();
        let phase2: Vec<_> = rounds.iter().filter(|r| r.phase == 2).collect();
        assert_eq!(phase2.len(), 6);
        assert!(phase2.iter().all(|r| r.repetition_of.is_none()));
        // Cross-cell closing rounds activate both cells at once.
        let cross = phase2.iter().find(|r| r.served == vec![1, 3]).unwrap();
        assert_eq!(cross.passes[0].cells, vec![1, 2]);
        let same = phase2.iter().find(|r| r.served == vec![1, 2]).unwrap();
        assert_eq!(same.passes[0].cells, vec![1]);

        // (3,2,3): interior phase 2 has 15 base + 9 repetition rounds.
        let params = schedule_params(3, 2, 3).unwrap();
        let rounds = enumerate_rounds(&params).unwrap();
        let phase2: Vec<_> = rounds.iter().filter(|r| r.phase == 2).collect();
        assert_eq!(phase2.len(), 24);
        let reps: Vec<_> = phase2.iter().filter(|r| r.repetition_of.is_some()).collect();
        assert_eq!(reps.len(), 9);
        for rep in &reps {
            let base = &rounds[rep.repetition_of.unwrap()];
            assert_eq!(base.served, rep.served);
            assert_ne!(base.passes[0].cells, rep.passes[0].cells);
            assert_eq!(base.passes[0].cells.len(), 1);
            assert_eq!(rep.passes[0].cells.len(), 1);
        }
        // Total round count across phases matches R_p.
        for (i, expected) in params.r.iter().enumerate() {
            let count = rounds.iter().filter(|r| r.phase == i as u64 + 1).count();
            assert_eq!(BigInt::from(count), *expected);
        }
    }

    #[test]
    fn round_enumeration_rejects_many_cells() {
        let params = schedule_params(2, 3, 2).unwrap();
        assert!(enumerate_rounds(&params).is_err());
    }
}
