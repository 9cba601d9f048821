//! Delayed-CSIT enforcement.
//!
//! Transmitter-side precoder builders only ever learn the channels of
//! completed phases: while phase `p` is running, a builder may read fading
//! rows of phases `1..p-1` only. Receivers, by contrast, know their own
//! current channels (perfect CSIR) and read the [`ChannelSet`] directly.
//!
//! Every builder-side read goes through [`CsitLedger::builder_row`], which
//! logs the access and whether it was legal. The run's `csit_audit_clean`
//! flag is simply "no illegal access was ever logged" — the row is still
//! returned, so an audit violation shows up in the report instead of
//! silently changing the constructed signals.

use nalgebra::RowDVector;

use crate::cmatrix::C64;
use crate::simengine::channel::ChannelSet;
use crate::Result;

/// One logged transmitter-side channel access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsitAccess {
    /// Round whose builder performed the read.
    pub requester_round: usize,
    /// Global slot of the requested fading row.
    pub slot: usize,
    /// Phase the requested slot belongs to.
    pub slot_phase: u64,
    /// Phase that was running when the read happened.
    pub current_phase: u64,
    /// Whether the read respected the delay (slot phase strictly earlier).
    pub legal: bool,
}

/// Access log plus the phase boundary the builders currently live in.
pub struct CsitLedger {
    /// Phase of each global slot, filled once from the round plan.
    slot_phase: Vec<u64>,
    current_phase: u64,
    current_round: usize,
    log: Vec<CsitAccess>,
}

impl CsitLedger {
    pub fn new(slot_phase: Vec<u64>) -> Self {
        CsitLedger {
            slot_phase,
            current_phase: 1,
            current_round: 0,
            log: Vec::new(),
        }
    }

    /// Marks which round/phase the builders are now constructing.
    pub fn enter_round(&mut self, round: usize, phase: u64) {
        self.current_round = round;
        self.current_phase = phase;
    }

    /// A transmitter-side read of the fading row (`slot`, `user`, `cell`).
    /// Logged always; legal only when the slot's phase is already over.
    pub fn builder_row(
        &mut self,
        channels: &ChannelSet,
        slot: usize,
        user: u64,
        cell: u64,
    ) -> Result<RowDVector<C64>> {
        let slot_phase = self.slot_phase.get(slot).copied().unwrap_or(u64::MAX);
        self.log.push(CsitAccess {
            requester_round: self.current_round,
            slot,
            slot_phase,
            current_phase: self.current_phase,
            legal: slot_phase < self.current_phase,
        });
        channels.row(slot, user, cell)
    }

    pub fn audit_clean(&self) -> bool {
        self.log.iter().all(|a| a.legal)
    }

    pub fn log(&self) -> &[CsitAccess] {
        &self.log
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_distinguishes_past_from_present() {
        let channels = ChannelSet::generate(3, 6, 2, 1, 2);
        // Slots 0-1 are phase 1, slots 2-5 phase 2.
        let mut ledger = CsitLedger::new(vec![1, 1, 2, 2, 2, 2]);

        ledger.enter_round(4, 2);
        ledger.builder_row(&channels, 0, 1, 1).unwrap();
        ledger.builder_row(&channels, 1, 2, 1).unwrap();
        assert!(ledger.audit_clean(), "past-phase reads are legal");

        ledger.builder_row(&channels, 2, 1, 1).unwrap();
        assert!(!ledger.audit_clean(), "current-phase read must trip audit");
        let bad = ledger.log().last().unwrap();
        assert_eq!(bad.requester_round, 4);
        assert_eq!(bad.slot_phase, 2);
        assert_eq!(bad.current_phase, 2);
        assert!(!bad.legal);
    }

    #[test]
    fn out_of_range_slot_is_logged_illegal_and_errors() {
        let channels = ChannelSet::generate(3, 2, 2, 1, 2);
        let mut ledger = CsitLedger::new(vec![1, 1]);
        ledger.enter_round(0, 1);
        assert!(ledger.builder_row(&channels, 9, 1, 1).is_err());
        assert!(!ledger.audit_clean());
    }
}
