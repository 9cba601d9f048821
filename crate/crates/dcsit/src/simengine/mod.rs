//! End-to-end simulation of the transmission schemes.
//!
//! The engine plays a scheduled protocol over freshly drawn random
//! channels and decides decodability by numerical rank tests, making it an
//! independent oracle for the exact formula layer: the recovered
//! interference-free combinations per user must reproduce `b`, and the
//! achieved ratio `sum_j lcs / tau` must equal the closed-form DoF.
//!
//! Three variants run:
//!
//! - [`Variant::MatBc`]: the (truncated) retrospective-alignment scheme on
//!   the single-cell broadcast channel,
//! - [`Variant::UmatIbc`]: the uncoupled two-cell scheme, where every
//!   retransmission of overheard interference is kept single-cell,
//! - [`Variant::NaiveMatIbc`]: the negative control — the single-cell
//!   construction applied across two cells, whose coupled retransmissions
//!   break alignment from phase 3 on.
//!
//! The rules of the game are enforced mechanically rather than assumed:
//! transmitter-side builders obtain fading rows only through the
//! [`CsitLedger`], which logs every access and fails the audit on any
//! current-phase read (the delayed-CSIT constraint); receivers read their
//! own channels freely (perfect CSIR). The noise-free regime means ranks,
//! not SNR, decide everything.
//!
//! All randomness — channels, the phase-1 codebook, the per-round
//! combiners — derives from a single master seed through independent named
//! streams, so every report is reproducible bit-for-bit.

mod channel;
mod engine;
mod ledger;
mod ohi;

pub use channel::ChannelSet;
pub use engine::{
    build_phase1_precoders, naive_mat_on_ibc, simulate, simulate_detailed, verify_alignment,
    AlignmentRecord, DecodeReport, RoundSummary, SimConfig, SimTrace, SsmAccumulator, UserReport,
    Variant,
};
pub use ledger::{CsitAccess, CsitLedger};
pub use ohi::{OhiRecord, OhiStore, Provenance};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational;

    fn config(variant: Variant, l: u64, c: u64, theta: u64, seed: u64) -> SimConfig {
        SimConfig::new(variant, l, c, theta, seed).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(Variant::MatBc, 6, 2, 3, 0).is_err());
        assert!(SimConfig::new(Variant::UmatIbc, 2, 1, 2, 0).is_err());
        assert!(SimConfig::new(Variant::NaiveMatIbc, 3, 2, 2, 0).is_err());
        assert!(SimConfig::new(Variant::NaiveMatIbc, 3, 1, 3, 0).is_err());
        assert!(SimConfig::new(Variant::UmatIbc, 3, 2, 4, 0).is_err());
    }

    #[test]
    fn variant_labels() {
        assert_eq!(Variant::MatBc.to_string(), "MAT_BC");
        assert_eq!(Variant::UmatIbc.to_string(), "UMAT_IBC");
        assert_eq!(Variant::NaiveMatIbc.to_string(), "NAIVE_MAT_IBC");
    }

    #[test]
    fn phase1_precoders_are_full_rank_and_reproducible() {
        let params = crate::schedule::schedule_params(6, 1, 3).unwrap();
        let a = build_phase1_precoders(&params, 11).unwrap();
        let b = build_phase1_precoders(&params, 11).unwrap();
        let c = build_phase1_precoders(&params, 12).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a[0].nrows(), 30);
        assert_eq!(a[0].ncols(), 30);
        assert_eq!(a[0], b[0], "same seed, same codebook");
        assert_ne!(a[0], c[0]);
        for v in &a {
            let rank = crate::cmatrix::numerical_rank(v, 1e3).unwrap();
            assert_eq!(rank, 30, "codebook blocks must be full rank");
        }
        // Unit-norm columns.
        for col in a[0].column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_cell_pair_scheme_decodes_with_expected_ranks() {
        let cfg = config(Variant::UmatIbc, 2, 2, 2, 0);
        let report = simulate(&cfg).unwrap();
        assert_eq!(report.k, 4);
        assert_eq!(report.b, 4);
        assert_eq!(report.tau, 10);
        for user in &report.users {
            assert_eq!(user.rank_interference, 6, "user {}", user.user);
            assert_eq!(user.rank_joint, 10, "user {}", user.user);
            assert_eq!(user.lcs_recovered, 4);
            assert!(user.decodable);
        }
        assert_eq!(report.achieved_dof, rational(8, 5));
        assert!(report.csit_audit_clean);
        assert!(report.all_aligned());
        assert_eq!(report.coupled_consumed, 0);
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let cfg = config(Variant::UmatIbc, 2, 2, 2, 3);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate(&config(Variant::UmatIbc, 2, 2, 2, 4)).unwrap();
        // Ranks agree across seeds (probability-1 events), but the raw
        // alignment/rank data comes from different channels; the reports
        // compare equal except for the seed field itself.
        assert_eq!(a.achieved_dof, c.achieved_dof);
        assert_ne!(a.seed, c.seed);
    }

    #[test]
    fn tracker_agrees_with_direct_alignment_check() {
        let cfg = config(Variant::UmatIbc, 2, 2, 2, 1);
        let (report, trace) = simulate_detailed(&cfg).unwrap();
        for rec in &report.alignment {
            let direct =
                verify_alignment(&trace, rec.round, rec.served_user, cfg.tol_scale).unwrap();
            assert_eq!(
                direct, rec.aligned,
                "tracker vs direct check at round {} user {}",
                rec.round, rec.served_user
            );
        }
    }

    #[test]
    fn uncoupled_records_stay_single_cell() {
        let cfg = config(Variant::UmatIbc, 2, 2, 2, 2);
        let (report, trace) = simulate_detailed(&cfg).unwrap();
        assert_eq!(report.coupled_consumed, 0);
        for rec in trace.ohi.records() {
            if rec.consumed {
                let cell = rec.source_cell.expect("consumed record must be single-cell");
                for &u in &rec.desired_by {
                    assert_eq!(crate::schedule::cell_of(u, cfg.l).unwrap(), cell);
                }
                // Support check: energy outside the desired users' columns
                // is numerically zero.
                let b = report.b as usize;
                let mut masked = rec.row.clone();
                for &u in &rec.desired_by {
                    masked
                        .view_mut((0, (u as usize - 1) * b), (1, b))
                        .fill(crate::cmatrix::C64::new(0.0, 0.0));
                }
                assert!(
                    masked.norm() < 1e-9 * rec.row.norm().max(1.0),
                    "record has support outside its desired users"
                );
            }
        }
    }

    #[test]
    fn single_phase_schedule_is_plain_time_division() {
        let cfg = config(Variant::MatBc, 3, 1, 1, 5);
        let report = simulate(&cfg).unwrap();
        assert_eq!(report.b, 1);
        assert_eq!(report.tau, 3);
        assert!(report.all_decodable());
        assert_eq!(report.achieved_dof, rational(1, 1));
    }

    #[test]
    fn injected_current_phase_read_trips_audit_only() {
        let cfg = config(Variant::UmatIbc, 2, 2, 2, 0);
        let clean = simulate(&cfg).unwrap();
        let probed = simulate(&cfg.clone().with_injected_current_phase_read()).unwrap();
        assert!(clean.csit_audit_clean);
        assert!(!probed.csit_audit_clean, "probe must fail the audit");
        // The probe discards what it reads: the physics is unchanged.
        assert!(probed.all_decodable());
        assert_eq!(probed.users, clean.users);
    }

    #[test]
    fn broadcast_fixture_decodes_with_expected_ranks() {
        let cfg = config(Variant::MatBc, 6, 1, 3, 0);
        let report = simulate(&cfg).unwrap();
        assert_eq!((report.k, report.b, report.tau), (6, 30, 85));
        for user in &report.users {
            assert_eq!(user.rank_interference, 55, "user {}", user.user);
            assert_eq!(user.rank_joint, 85);
            assert_eq!(user.lcs_recovered, 30);
        }
        assert_eq!(report.achieved_dof, rational(36, 17));
        assert!(report.csit_audit_clean);
        assert!(report.all_aligned());
    }

    #[test]
    fn three_user_two_cell_fixture_decodes_with_expected_ranks() {
        let cfg = config(Variant::UmatIbc, 3, 2, 3, 0);
        let report = simulate(&cfg).unwrap();
        assert_eq!((report.k, report.b, report.tau), (6, 30, 94));
        for user in &report.users {
            assert_eq!(user.rank_interference, 61, "user {}", user.user);
            assert_eq!(user.rank_joint, 91);
            assert_eq!(user.lcs_recovered, 30);
            assert!(user.decodable);
        }
        assert_eq!(report.achieved_dof, rational(90, 47));
        assert!(report.csit_audit_clean);
        assert!(report.all_aligned());
        assert_eq!(report.coupled_consumed, 0);
    }

    #[test]
    fn naive_control_breaks_in_phase_three() {
        let cfg = config(Variant::NaiveMatIbc, 3, 2, 3, 0);
        let report = naive_mat_on_ibc(&cfg).unwrap();
        assert_eq!((report.k, report.b, report.tau), (6, 30, 85));
        assert!(
            !report.all_decodable(),
            "the naive control must not decode"
        );
        assert!(report.coupled_consumed > 0, "coupling is the point");
        assert!(
            report
                .alignment
                .iter()
                .any(|a| a.phase == 3 && a.cross_cell && !a.aligned),
            "some phase-3 cross-cell round must break alignment"
        );
        // The naive scheme cheats on coupling, not on causality.
        assert!(report.csit_audit_clean);
        // Achieved DoF stays strictly below the schedule's promise.
        assert!(report.achieved_dof < rational(36, 17));
    }

    #[test]
    fn naive_tracker_agrees_with_direct_alignment_check_on_phase_three() {
        let cfg = config(Variant::NaiveMatIbc, 3, 2, 3, 1);
        let (report, trace) = simulate_detailed(&cfg).unwrap();
        for rec in report.alignment.iter().filter(|a| a.phase == 3) {
            let direct =
                verify_alignment(&trace, rec.round, rec.served_user, cfg.tol_scale).unwrap();
            assert_eq!(
                direct, rec.aligned,
                "tracker vs direct check at round {} user {}",
                rec.round, rec.served_user
            );
        }
    }
}
