//! Protocol execution and decodability analysis.
//!
//! A run walks the scheduled rounds in order. Phase-1 rounds transmit each
//! user's fresh symbol block through a channel-independent codebook; later
//! rounds retransmit random combinations of previously overheard rows,
//! built strictly from already-completed phases' channels (enforced through
//! the [`CsitLedger`]). Every user's received rows accumulate into a signal
//! space matrix, and decodability is decided per user by the column-block
//! rank test `rank([I | D]) - rank(I) = b`: receiver-side interference
//! cancellation is a row operation, so the rank criterion is equivalent to
//! exhibiting an explicit zero-forcing filter while staying robust to
//! bookkeeping choices.
//!
//! The transmit array per base station spans the full per-user symbol load
//! of a phase-1 round: `b = K * lambda` symbols leave in `S_1 = lambda`
//! slots, so `K` antennas are required for the phase-1 codebook to have
//! full column rank — with fewer antennas no later phase could ever
//! complete the desired ranks, because all retransmissions stay inside the
//! phase-1 row span.

use nalgebra::{DMatrix, RowDVector};
use num_bigint::BigInt;
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;

use crate::cmatrix::{numerical_rank, rowspan_contained, C64, CMatrix, DEFAULT_TOL_SCALE};
use crate::exactnum::BigRational;
use crate::schedule::{
    cell_of, enumerate_rounds, k_subsets, schedule_params, Pass, RoundPlan, SchemeParams,
};
use crate::simengine::channel::{sample_cn, stream_rng, ChannelSet};
use crate::simengine::ledger::CsitLedger;
use crate::simengine::ohi::{OhiRecord, OhiStore, Provenance};
use crate::{Error, Result};

/// Which protocol the run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Truncated retrospective-alignment scheme on the single-cell
    /// broadcast channel (`C = 1`).
    MatBc,
    /// Uncoupled two-cell scheme: cross-cell retransmissions are split so
    /// each base station only ever forwards rows its own cell produced.
    UmatIbc,
    /// Negative control: the single-cell construction applied verbatim to
    /// two cells, with coupled rows split across simultaneous base
    /// stations. Alignment breaks in the third phase.
    NaiveMatIbc,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::MatBc => "MAT_BC",
            Variant::UmatIbc => "UMAT_IBC",
            Variant::NaiveMatIbc => "NAIVE_MAT_IBC",
        })
    }
}

/// Everything a run needs to be reproducible bit-for-bit.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub variant: Variant,
    pub l: u64,
    pub c: u64,
    pub theta: u64,
    pub seed: u64,
    pub tol_scale: f64,
    pub params: SchemeParams,
    probe_builder_reads_current_phase: bool,
}

impl SimConfig {
    /// Validates the variant/geometry combination and derives the schedule.
    pub fn new(variant: Variant, l: u64, c: u64, theta: u64, seed: u64) -> Result<Self> {
        let params = match variant {
            Variant::MatBc => {
                if c != 1 {
                    return Err(Error::InvalidArgument(
                        "MAT_BC runs on a single cell (C = 1)".into(),
                    ));
                }
                schedule_params(l, 1, theta)?
            }
            Variant::UmatIbc => {
                if c != 2 {
                    return Err(Error::InvalidArgument(
                        "UMAT_IBC simulation supports exactly C = 2 cells".into(),
                    ));
                }
                schedule_params(l, 2, theta)?
            }
            Variant::NaiveMatIbc => {
                if c != 2 {
                    return Err(Error::InvalidArgument(
                        "NAIVE_MAT_IBC simulation supports exactly C = 2 cells".into(),
                    ));
                }
                if theta < 3 {
                    return Err(Error::InvalidArgument(
                        "NAIVE_MAT_IBC needs theta >= 3: coupled rows are first \
                         retransmitted in phase 3, so shorter runs decode fine \
                         and make no negative control"
                            .into(),
                    ));
                }
                // The naive run executes the single-cell schedule over all
                // K users as if the two cells were one transmitter.
                schedule_params(l * c, 1, theta)?
            }
        };
        Ok(SimConfig {
            variant,
            l,
            c,
            theta,
            seed,
            tol_scale: DEFAULT_TOL_SCALE,
            params,
            probe_builder_reads_current_phase: false,
        })
    }

    pub fn with_tol_scale(mut self, tol_scale: f64) -> Self {
        self.tol_scale = tol_scale;
        self
    }

    /// Test hook: makes the first later-phase precoder builder read one
    /// current-phase fading row through the ledger (and discard it), which
    /// must trip the audit without changing any transmitted signal.
    pub fn with_injected_current_phase_read(mut self) -> Self {
        self.probe_builder_reads_current_phase = true;
        self
    }
}

/// Per-user growing signal space matrix plus its desired-column block.
pub struct SsmAccumulator {
    rows: Vec<RowDVector<C64>>,
    desired_start: usize,
    b: usize,
    width: usize,
}

impl SsmAccumulator {
    fn new(user: u64, b: usize, width: usize) -> Self {
        SsmAccumulator {
            rows: Vec::new(),
            desired_start: (user as usize - 1) * b,
            b,
            width,
        }
    }

    fn push(&mut self, row: RowDVector<C64>) {
        debug_assert_eq!(row.len(), self.width);
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[RowDVector<C64>] {
        &self.rows
    }

    /// Columns holding this user's own symbols.
    pub fn desired_cols(&self) -> std::ops::Range<usize> {
        self.desired_start..self.desired_start + self.b
    }

    /// The full matrix: one row per elapsed slot, `K*b` columns.
    pub fn matrix(&self) -> CMatrix {
        rows_to_matrix(&self.rows, self.width)
    }

    /// The matrix restricted to the interference columns (all but the
    /// desired block), over a chosen row range.
    pub fn interference_matrix(&self, rows: std::ops::Range<usize>) -> CMatrix {
        let slice = &self.rows[rows];
        let cols = self.width - self.b;
        DMatrix::from_fn(slice.len(), cols, |i, j| {
            let col = if j < self.desired_start { j } else { j + self.b };
            slice[i][col]
        })
    }
}

fn rows_to_matrix(rows: &[RowDVector<C64>], width: usize) -> CMatrix {
    DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j])
}

/// One executed round, for post-hoc inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundSummary {
    pub phase: u64,
    pub served: Vec<u64>,
    /// Cells transmitting during the round.
    pub active_cells: Vec<u64>,
    /// Whether the served group spans more than one cell.
    pub cross_cell: bool,
    pub repetition_of: Option<usize>,
    /// Global slot range the round occupied.
    pub slots: std::ops::Range<usize>,
}

/// Retained run state: every user's signal space matrix, the overheard-row
/// store and the executed round layout.
pub struct SimTrace {
    pub ssm: Vec<SsmAccumulator>,
    pub rounds: Vec<RoundSummary>,
    pub ohi: OhiStore,
    pub k: usize,
    pub b: usize,
    pub tau: usize,
}

/// Alignment verdict for one (round, served user) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentRecord {
    pub round: usize,
    pub phase: u64,
    pub served_user: u64,
    pub cross_cell: bool,
    pub aligned: bool,
}

/// Final per-user rank accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserReport {
    pub user: u64,
    /// Rank of the interference columns of the user's signal space matrix.
    pub rank_interference: usize,
    /// Rank of the full matrix (interference and desired columns jointly).
    pub rank_joint: usize,
    /// Interference-free linear combinations recovered.
    pub lcs_recovered: usize,
    pub decodable: bool,
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    pub variant: Variant,
    pub l: u64,
    pub c: u64,
    pub theta: u64,
    pub seed: u64,
    pub k: u64,
    pub b: u64,
    pub tau: u64,
    pub users: Vec<UserReport>,
    /// `sum_j lcs_recovered / tau`, exact.
    pub achieved_dof: BigRational,
    pub csit_audit_clean: bool,
    /// One record per (round, served user), in execution order.
    pub alignment: Vec<AlignmentRecord>,
    /// Consumed overheard rows lacking a single source cell; zero for the
    /// uncoupled scheme, positive for the naive control.
    pub coupled_consumed: u64,
}

impl DecodeReport {
    pub fn all_decodable(&self) -> bool {
        self.users.iter().all(|u| u.decodable)
    }

    pub fn all_aligned(&self) -> bool {
        self.alignment.iter().all(|a| a.aligned)
    }
}

/// Rowspan check with reorthogonalized Gram-Schmidt: cheap enough to run
/// for every user at every slot, unlike a fresh SVD per round.
struct SpanTracker {
    basis: Vec<RowDVector<C64>>,
    rel_tol: f64,
}

impl SpanTracker {
    fn new(rel_tol: f64) -> Self {
        SpanTracker {
            basis: Vec::new(),
            rel_tol,
        }
    }

    /// True when `row` already lies in the tracked span (up to the relative
    /// tolerance); otherwise the span is extended to include it.
    fn absorb(&mut self, row: &RowDVector<C64>) -> bool {
        let norm0 = row.norm();
        if norm0 == 0.0 {
            return true;
        }
        let mut v = row.clone();
        // Two projection sweeps keep the basis orthonormal to working
        // precision even when the row is nearly dependent.
        for _ in 0..2 {
            for b in &self.basis {
                let coeff = b.dotc(&v);
                v -= b * coeff;
            }
        }
        let residual = v.norm();
        if residual <= self.rel_tol * norm0 {
            true
        } else {
            v.unscale_mut(residual);
            self.basis.push(v);
            false
        }
    }
}

fn usize_of(v: &BigInt, what: &str) -> Result<usize> {
    usize::try_from(v)
        .map_err(|_| Error::InvalidArgument(format!("{what} = {v} does not fit the machine")))
}

/// Random matrix with i.i.d. complex Gaussian entries and unit-norm
/// columns. Power normalization only conditions the numerics: the rank
/// tests are scale-invariant.
fn random_unit_col_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let mut m = DMatrix::from_fn(rows, cols, |_, _| sample_cn(rng));
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    m
}

/// Channel-independent phase-1 codebook: one `(K*S_1) x b` full-rank
/// matrix per phase-1 round, drawn from the "codebook" stream of
/// `codebook_seed` so transmitter and receivers share it by construction.
pub fn build_phase1_precoders(params: &SchemeParams, codebook_seed: u64) -> Result<Vec<CMatrix>> {
    let k = params.k as usize;
    let b = usize_of(&params.b, "b")?;
    let s1 = usize_of(&params.s[0], "S_1")?;
    let mut rng = stream_rng(codebook_seed, "codebook");
    Ok((0..k)
        .map(|_| random_unit_col_matrix(&mut rng, k * s1, b))
        .collect())
}

/// The round list the naive control executes: the single-cell schedule's
/// groups over all `K` users, each transmitted by every cell the group
/// spans, simultaneously.
fn naive_rounds(k: u64, theta: u64, l: u64) -> Result<Vec<RoundPlan>> {
    let mut rounds = Vec::new();
    for p in 1..=theta {
        for served in k_subsets(k, p) {
            let mut cells: Vec<u64> = Vec::new();
            for &j in &served {
                let cell = cell_of(j, l)?;
                if !cells.contains(&cell) {
                    cells.push(cell);
                }
            }
            cells.sort_unstable();
            rounds.push(RoundPlan {
                phase: p,
                served,
                passes: vec![Pass { cells }],
                repetition_of: None,
            });
        }
    }
    Ok(rounds)
}

/// Post-hoc alignment check, straight from the definition: the rows
/// `receiver` collected during `round`, restricted to its interference
/// columns, must lie in the row span of everything it had collected
/// before the round (same column restriction).
pub fn verify_alignment(
    trace: &SimTrace,
    round: usize,
    receiver: u64,
    tol_scale: f64,
) -> Result<bool> {
    let summary = trace
        .rounds
        .get(round)
        .ok_or_else(|| Error::InvalidArgument(format!("verify_alignment: no round {round}")))?;
    if receiver == 0 || receiver as usize > trace.ssm.len() {
        return Err(Error::InvalidArgument(format!(
            "verify_alignment: no receiver {receiver}"
        )));
    }
    let ssm = &trace.ssm[receiver as usize - 1];
    let before = ssm.interference_matrix(0..summary.slots.start);
    let appended = ssm.interference_matrix(summary.slots.clone());
    rowspan_contained(&appended, &before, tol_scale)
}

struct Engine<'a> {
    config: &'a SimConfig,
    k: usize,
    ant: usize,
    b: usize,
    kb: usize,
    tau: usize,
    s: Vec<usize>,
    rounds: Vec<RoundPlan>,
    channels: ChannelSet,
    ledger: CsitLedger,
    ohi: OhiStore,
    ssm: Vec<SsmAccumulator>,
    trackers: Vec<SpanTracker>,
    /// Per executed round: the `(cell, W)` content actually transmitted,
    /// kept so later builders can rebuild overheard rows from past
    /// channels plus past content.
    content: Vec<Vec<(u64, CMatrix)>>,
    summaries: Vec<RoundSummary>,
    alignment: Vec<AlignmentRecord>,
    combiners: ChaCha8Rng,
    phase1: Vec<CMatrix>,
    probe_pending: bool,
}

impl<'a> Engine<'a> {
    fn new(config: &'a SimConfig) -> Result<Self> {
        let params = &config.params;
        let k = params.k as usize;
        let b = usize_of(&params.b, "b")?;
        let tau = usize_of(&params.tau, "tau")?;
        let s = params
            .s
            .iter()
            .map(|v| usize_of(v, "S_p"))
            .collect::<Result<Vec<_>>>()?;
        let rounds = match config.variant {
            Variant::MatBc | Variant::UmatIbc => enumerate_rounds(params)?,
            Variant::NaiveMatIbc => naive_rounds(params.k, config.theta, config.l)?,
        };
        // Cross-check the expansion against the schedule's own accounting.
        let mut per_phase = vec![BigInt::zero(); config.theta as usize];
        let mut slot_total = 0usize;
        for plan in &rounds {
            per_phase[plan.phase as usize - 1] += 1;
            slot_total += s[plan.phase as usize - 1];
        }
        if per_phase != params.r || slot_total != tau {
            return Err(Error::Consistency(format!(
                "round expansion disagrees with the schedule: per-phase counts {per_phase:?} \
                 vs {:?}, slots {slot_total} vs {tau}",
                params.r
            )));
        }
        let slot_phase: Vec<u64> = rounds
            .iter()
            .flat_map(|plan| std::iter::repeat(plan.phase).take(s[plan.phase as usize - 1]))
            .collect();
        let kb = k * b;
        let ant = k;
        let channels = ChannelSet::generate(config.seed, tau, k, config.c as usize, ant);
        let phase1 = build_phase1_precoders(params, config.seed)?;
        let rel_tol = config.tol_scale * kb as f64 * f64::EPSILON;
        Ok(Engine {
            config,
            k,
            ant,
            b,
            kb,
            tau,
            s,
            rounds,
            channels,
            ledger: CsitLedger::new(slot_phase),
            ohi: OhiStore::default(),
            ssm: (1..=k as u64)
                .map(|j| SsmAccumulator::new(j, b, kb))
                .collect(),
            trackers: (0..k).map(|_| SpanTracker::new(rel_tol)).collect(),
            content: Vec::new(),
            summaries: Vec::new(),
            alignment: Vec::new(),
            combiners: stream_rng(config.seed, "combiners"),
            phase1,
            probe_pending: config.probe_builder_reads_current_phase,
        })
    }

    fn user_cell(&self, j: u64) -> Result<u64> {
        cell_of(j, self.config.l)
    }

    /// Phase-1 content: the user's codebook block embedded at its columns.
    fn phase1_content(&self, plan: &RoundPlan) -> Result<Vec<(u64, CMatrix)>> {
        let r = plan.served[0];
        let v = &self.phase1[r as usize - 1];
        let mut w = CMatrix::zeros(v.nrows(), self.kb);
        w.view_mut((0, (r as usize - 1) * self.b), (v.nrows(), self.b))
            .copy_from(v);
        Ok(vec![(plan.passes[0].cells[0], w)])
    }

    /// Order-`p` content for `p >= 2`: consume the overheard inventory the
    /// round is entitled to, rebuild those rows from past channels and past
    /// content through the ledger, and combine them with fresh random
    /// matrices.
    fn phase_p_content(
        &mut self,
        index: usize,
        plan: &RoundPlan,
    ) -> Result<Vec<(u64, CMatrix)>> {
        let p = plan.phase;
        let active = &plan.passes[0].cells;
        let s_p = self.s[p as usize - 1];

        if self.probe_pending {
            // Injected misbehaving builder: read (and discard) a fading row
            // of the round being built — a current-phase read.
            self.probe_pending = false;
            let slot = self.summaries.last().map_or(0, |s| s.slots.end);
            let _ = self
                .ledger
                .builder_row(&self.channels, slot, plan.served[0], active[0])?;
        }

        // Which records this round consumes (see ohi module docs).
        let source_filter: Option<&[u64]> = match self.config.variant {
            Variant::NaiveMatIbc => None,
            _ => Some(active.as_slice()),
        };
        let mut consumed: Vec<usize> = Vec::new();
        for (i, &m) in plan.served.iter().enumerate() {
            let mut t_subset = plan.served.clone();
            t_subset.remove(i);
            consumed.extend(self.ohi.consume(m, &t_subset, p - 1, source_filter));
        }
        consumed.sort_unstable();
        if consumed.is_empty() {
            return Err(Error::Protocol(format!(
                "round {index} (phase {p}, group {:?}) found no overheard rows to retransmit",
                plan.served
            )));
        }

        // Rebuild each consumed row through the ledger: channels of the
        // producing slot (an earlier phase) times the recorded content.
        let mut rebuilt: Vec<(usize, RowDVector<C64>)> = Vec::with_capacity(consumed.len());
        for &ri in &consumed {
            let (observer, prov, stored_norm) = {
                let rec = &self.ohi.records()[ri];
                (rec.observer, rec.provenance, rec.row.norm())
            };
            let mut row = RowDVector::<C64>::zeros(self.kb);
            for (cell, w) in &self.content[prov.round] {
                let h = self
                    .ledger
                    .builder_row(&self.channels, prov.global_slot, observer, *cell)?;
                row += h * w.view((prov.slot_in_round * self.ant, 0), (self.ant, self.kb));
            }
            let diff = (&row - &self.ohi.records()[ri].row).norm();
            if diff > 1e-6 * stored_norm.max(1.0) {
                return Err(Error::Protocol(format!(
                    "rebuilt overheard row diverged from the received one \
                     (record {ri}, difference {diff:e})"
                )));
            }
            rebuilt.push((ri, row));
        }

        let mut parts: Vec<(u64, CMatrix)> = Vec::new();
        match self.config.variant {
            Variant::MatBc | Variant::UmatIbc => {
                // Each base station retransmits only rows its own cell
                // produced, under its own fresh combiner.
                for &cell in active {
                    let rows: Vec<&RowDVector<C64>> = rebuilt
                        .iter()
                        .filter(|(ri, _)| self.ohi.records()[*ri].source_cell == Some(cell))
                        .map(|(_, row)| row)
                        .collect();
                    if rows.is_empty() {
                        return Err(Error::Protocol(format!(
                            "round {index}: active cell {cell} has no rows to retransmit"
                        )));
                    }
                    let t_stack = DMatrix::from_fn(rows.len(), self.kb, |i, j| rows[i][j]);
                    let sigma =
                        random_unit_col_matrix(&mut self.combiners, self.ant * s_p, rows.len());
                    parts.push((cell, sigma * t_stack));
                }
            }
            Variant::NaiveMatIbc => {
                // One shared combiner; each base station transmits the
                // column restriction of the stack to its own users — the
                // per-row split that breaks coupled rows apart.
                let rows: Vec<&RowDVector<C64>> =
                    rebuilt.iter().map(|(_, row)| row).collect();
                let t_stack = DMatrix::from_fn(rows.len(), self.kb, |i, j| rows[i][j]);
                let sigma =
                    random_unit_col_matrix(&mut self.combiners, self.ant * s_p, rows.len());
                for &cell in active {
                    let lb = self.config.l as usize * self.b;
                    let start = (cell as usize - 1) * lb;
                    let mut restricted = CMatrix::zeros(rows.len(), self.kb);
                    restricted
                        .view_mut((0, start), (rows.len(), lb))
                        .copy_from(&t_stack.view((0, start), (rows.len(), lb)));
                    parts.push((cell, &sigma * restricted));
                }
            }
        }
        Ok(parts)
    }

    fn run(mut self) -> Result<(DecodeReport, SimTrace)> {
        let rounds = std::mem::take(&mut self.rounds);
        let mut global_slot = 0usize;
        for (index, plan) in rounds.iter().enumerate() {
            let p = plan.phase;
            let s_p = self.s[p as usize - 1];
            self.ledger.enter_round(index, p);
            let parts = if p == 1 {
                self.phase1_content(plan)?
            } else {
                self.phase_p_content(index, plan)?
            };

            let active: Vec<u64> = parts.iter().map(|(cell, _)| *cell).collect();
            let single_source = if active.len() == 1 {
                Some(active[0])
            } else {
                None
            };
            let mut desired_by = plan.served.clone();
            if let Some(cell) = single_source {
                desired_by.retain(|&j| self.user_cell(j).unwrap_or(0) == cell);
            }
            let cross_cell = {
                let mut cells: Vec<u64> = Vec::new();
                for &j in &plan.served {
                    let cell = self.user_cell(j)?;
                    if !cells.contains(&cell) {
                        cells.push(cell);
                    }
                }
                cells.len() > 1
            };

            let mut served_aligned = vec![true; plan.served.len()];
            for slot_in_round in 0..s_p {
                let t = global_slot + slot_in_round;
                for j in 1..=self.k as u64 {
                    let mut row = RowDVector::<C64>::zeros(self.kb);
                    for (cell, w) in &parts {
                        let h = self.channels.row(t, j, *cell)?;
                        row += h * w.view((slot_in_round * self.ant, 0), (self.ant, self.kb));
                    }
                    // Interference-span tracking: zero out the user's own
                    // block and see whether the rest adds a dimension.
                    let mut zeroed = row.clone();
                    let ju = j as usize - 1;
                    zeroed
                        .view_mut((0, ju * self.b), (1, self.b))
                        .fill(C64::new(0.0, 0.0));
                    let contained = self.trackers[ju].absorb(&zeroed);
                    if let Some(pos) = plan.served.iter().position(|&u| u == j) {
                        served_aligned[pos] &= contained;
                    } else {
                        self.ohi.push(OhiRecord {
                            observer: j,
                            source_cell: single_source,
                            desired_by: desired_by.clone(),
                            produced_for: plan.served.clone(),
                            row: row.clone(),
                            provenance: Provenance {
                                phase: p,
                                round: index,
                                slot_in_round,
                                global_slot: t,
                            },
                            consumed: false,
                        });
                    }
                    self.ssm[ju].push(row);
                }
            }

            for (pos, &j) in plan.served.iter().enumerate() {
                self.alignment.push(AlignmentRecord {
                    round: index,
                    phase: p,
                    served_user: j,
                    cross_cell,
                    aligned: served_aligned[pos],
                });
            }
            self.summaries.push(RoundSummary {
                phase: p,
                served: plan.served.clone(),
                active_cells: active,
                cross_cell,
                repetition_of: plan.repetition_of,
                slots: global_slot..global_slot + s_p,
            });
            self.content.push(parts);
            global_slot += s_p;
        }

        if !self.ohi.fully_consumed(self.config.theta) {
            return Err(Error::Protocol(
                "overheard-row inventory not consumed exactly once".into(),
            ));
        }

        let mut users = Vec::with_capacity(self.k);
        let mut lcs_total = 0usize;
        for j in 1..=self.k as u64 {
            let ssm = &self.ssm[j as usize - 1];
            if ssm.rows().len() != self.tau {
                return Err(Error::Consistency(format!(
                    "user {j} accumulated {} rows, expected {}",
                    ssm.rows().len(),
                    self.tau
                )));
            }
            let interference = ssm.interference_matrix(0..self.tau);
            let joint = ssm.matrix();
            let rank_interference = numerical_rank(&interference, self.config.tol_scale)?;
            let rank_joint = numerical_rank(&joint, self.config.tol_scale)?;
            if rank_joint < rank_interference || rank_joint - rank_interference > self.b {
                return Err(Error::Numeric(format!(
                    "user {j}: joint rank {rank_joint} vs interference rank \
                     {rank_interference} is outside [0, b]"
                )));
            }
            let lcs_recovered = rank_joint - rank_interference;
            lcs_total += lcs_recovered;
            users.push(UserReport {
                user: j,
                rank_interference,
                rank_joint,
                lcs_recovered,
                decodable: lcs_recovered == self.b,
            });
        }

        let report = DecodeReport {
            variant: self.config.variant,
            l: self.config.l,
            c: self.config.c,
            theta: self.config.theta,
            seed: self.config.seed,
            k: self.k as u64,
            b: self.b as u64,
            tau: self.tau as u64,
            users,
            achieved_dof: BigRational::new(BigInt::from(lcs_total), BigInt::from(self.tau)),
            csit_audit_clean: self.ledger.audit_clean(),
            alignment: self.alignment,
            coupled_consumed: self.ohi.coupled_consumed() as u64,
        };
        let trace = SimTrace {
            ssm: self.ssm,
            rounds: self.summaries,
            ohi: self.ohi,
            k: self.k,
            b: self.b,
            tau: self.tau,
        };
        Ok((report, trace))
    }
}

/// Runs one simulation and returns the decode report.
pub fn simulate(config: &SimConfig) -> Result<DecodeReport> {
    Ok(simulate_detailed(config)?.0)
}

/// Runs one simulation and additionally returns the retained trace (signal
/// space matrices, round layout, overheard-row store) for inspection.
pub fn simulate_detailed(config: &SimConfig) -> Result<(DecodeReport, SimTrace)> {
    Engine::new(config)?.run()
}

/// The negative control, by name: requires the naive variant.
pub fn naive_mat_on_ibc(config: &SimConfig) -> Result<DecodeReport> {
    if config.variant != Variant::NaiveMatIbc {
        return Err(Error::InvalidArgument(
            "naive_mat_on_ibc requires the NAIVE_MAT_IBC variant".into(),
        ));
    }
    simulate(config)
}
