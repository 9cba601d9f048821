//! Overheard-interference bookkeeping.
//!
//! While a round serves its group, every user outside the group still hears
//! the transmission; that row is simultaneously (a) a row of the listener's
//! signal space matrix and (b) a future transmission opportunity: a later
//! round serving `group ∪ {listener}` can retransmit it, handing the group
//! a fresh combination of its symbols and the listener a row it already
//! knows. Each such opportunity is an [`OhiRecord`].
//!
//! A phase-`p` round serving group `G` consumes, for every (p-1)-subset
//! `T ⊂ G` with `m` the single user of `G \ T`, all records observed by `m`
//! that a phase-(p-1) round serving exactly `T` produced. The schedule's
//! accounting makes this inventory exact: at the end of a run every record
//! from phases before the last is consumed exactly once and the final
//! phase's records are never touched.

use nalgebra::RowDVector;

use crate::cmatrix::C64;

/// Where a record came from, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub phase: u64,
    /// Global index of the producing round.
    pub round: usize,
    pub slot_in_round: usize,
    pub global_slot: usize,
}

/// One overheard row, waiting to be retransmitted.
#[derive(Debug, Clone)]
pub struct OhiRecord {
    /// The user that overheard the row (1-based).
    pub observer: u64,
    /// The single transmitting cell, when there was one. Simultaneous
    /// multi-cell transmissions (the naive control, final-phase pairs)
    /// have no single source and carry `None`.
    pub source_cell: Option<u64>,
    /// Users whose symbols the row carries: the served group restricted to
    /// the transmitting cell for single-cell passes, the full group
    /// otherwise.
    pub desired_by: Vec<u64>,
    /// Served group of the producing round (identifies the consumer).
    pub produced_for: Vec<u64>,
    /// The overheard row over the stacked `K*b` symbol space.
    pub row: RowDVector<C64>,
    pub provenance: Provenance,
    pub consumed: bool,
}

/// Append-only store; consumption marks records in place.
#[derive(Default)]
pub struct OhiStore {
    records: Vec<OhiRecord>,
}

impl OhiStore {
    pub fn push(&mut self, record: OhiRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[OhiRecord] {
        &self.records
    }

    /// Selects and marks the records a consuming round takes: unconsumed,
    /// observed by `observer`, produced for exactly `produced_for` in phase
    /// `phase`, and (when `source_cells` is given) attributable to one of
    /// those cells. Returns indices in store order, which is execution
    /// order, keeping runs reproducible.
    pub fn consume(
        &mut self,
        observer: u64,
        produced_for: &[u64],
        phase: u64,
        source_cells: Option<&[u64]>,
    ) -> Vec<usize> {
        let mut taken = Vec::new();
        for (idx, rec) in self.records.iter_mut().enumerate() {
            if rec.consumed
                || rec.observer != observer
                || rec.provenance.phase != phase
                || rec.produced_for != produced_for
            {
                continue;
            }
            if let Some(cells) = source_cells {
                match rec.source_cell {
                    Some(cell) if cells.contains(&cell) => {}
                    _ => continue,
                }
            }
            rec.consumed = true;
            taken.push(idx);
        }
        taken
    }

    /// Number of consumed records lacking a single source cell (coupled
    /// content) — zero in the uncoupled scheme, positive in the naive one.
    pub fn coupled_consumed(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.consumed && r.source_cell.is_none())
            .count()
    }

    /// Exactly-once check: every record before `last_phase` consumed, none
    /// of the final phase touched.
    pub fn fully_consumed(&self, last_phase: u64) -> bool {
        self.records
            .iter()
            .all(|r| r.consumed == (r.provenance.phase < last_phase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(observer: u64, produced_for: &[u64], phase: u64, cell: Option<u64>) -> OhiRecord {
        OhiRecord {
            observer,
            source_cell: cell,
            desired_by: produced_for.to_vec(),
            produced_for: produced_for.to_vec(),
            row: RowDVector::zeros(4),
            provenance: Provenance {
                phase,
                round: 0,
                slot_in_round: 0,
                global_slot: 0,
            },
            consumed: false,
        }
    }

    #[test]
    fn consume_filters_on_all_keys() {
        let mut store = OhiStore::default();
        store.push(record(3, &[1], 1, Some(1)));
        store.push(record(3, &[2], 1, Some(1)));
        store.push(record(3, &[1], 1, Some(2)));
        store.push(record(2, &[1], 1, Some(1)));
        store.push(record(3, &[1], 2, Some(1)));

        let taken = store.consume(3, &[1], 1, Some(&[1]));
        assert_eq!(taken, vec![0]);
        // Re-consuming finds nothing: the record is marked.
        assert!(store.consume(3, &[1], 1, Some(&[1])).is_empty());
        // No cell filter picks up the remaining cell-2 record.
        assert_eq!(store.consume(3, &[1], 1, None), vec![2]);
    }

    #[test]
    fn coupled_and_completion_accounting() {
        let mut store = OhiStore::default();
        store.push(record(3, &[1, 2], 2, None));
        store.push(record(4, &[1, 2], 2, Some(1)));
        store.push(record(5, &[1, 2, 3], 3, Some(1)));

        store.consume(3, &[1, 2], 2, None);
        assert_eq!(store.coupled_consumed(), 1);
        assert!(!store.fully_consumed(3), "cell-1 record still pending");
        store.consume(4, &[1, 2], 2, None);
        assert!(store.fully_consumed(3), "final-phase record stays untouched");
    }
}
