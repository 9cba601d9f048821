//! Random channel generation.
//!
//! Every (slot, receiver, transmitting cell) triple gets an independent
//! `1 x ant` row of i.i.d. circularly-symmetric complex Gaussian entries
//! with zero mean and unit variance, uncorrelated in time and space. All
//! draws come from a counter-based generator seeded from the master seed
//! plus a named stream, so the same seed always reproduces the same fading
//! realization regardless of what other randomness the run consumes.

use nalgebra::RowDVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmatrix::C64;
use crate::{Error, Result};

/// FNV-1a hash of a stream label; used to pick independent substreams of
/// the block cipher underneath `ChaCha8Rng` for a fixed master seed.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A deterministic generator for the named stream of a master seed.
pub(crate) fn stream_rng(master_seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(label_hash(label));
    rng
}

/// One draw of a circularly-symmetric complex Gaussian with unit variance:
/// the squared magnitude is Exp(1) and the phase uniform, so the real and
/// imaginary parts each come out N(0, 1/2).
pub(crate) fn sample_cn(rng: &mut ChaCha8Rng) -> C64 {
    // 1 - U in (0, 1] keeps the logarithm finite.
    let magnitude_sq: f64 = -f64::ln(1.0 - rng.gen::<f64>());
    let angle: f64 = std::f64::consts::TAU * rng.gen::<f64>();
    let r = magnitude_sq.sqrt();
    C64::new(r * angle.cos(), r * angle.sin())
}

/// All fading realizations of one run, indexed by global slot, receiving
/// user (1-based) and transmitting cell (1-based).
pub struct ChannelSet {
    slots: usize,
    users: usize,
    cells: usize,
    ant: usize,
    /// Flattened `[slot][user][cell][antenna]`.
    entries: Vec<C64>,
}

impl ChannelSet {
    /// Draws the full set for `slots` slots, `users` receivers and `cells`
    /// transmitters with `ant` antennas each, from the "channels" stream of
    /// `master_seed`.
    pub fn generate(
        master_seed: u64,
        slots: usize,
        users: usize,
        cells: usize,
        ant: usize,
    ) -> Self {
        let mut rng = stream_rng(master_seed, "channels");
        let total = slots * users * cells * ant;
        let entries = (0..total).map(|_| sample_cn(&mut rng)).collect();
        ChannelSet {
            slots,
            users,
            cells,
            ant,
            entries,
        }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn ant(&self) -> usize {
        self.ant
    }

    fn offset(&self, slot: usize, user: u64, cell: u64) -> Result<usize> {
        let u = user as usize;
        let c = cell as usize;
        if slot >= self.slots || u == 0 || u > self.users || c == 0 || c > self.cells {
            return Err(Error::InvalidArgument(format!(
                "channel index out of range: slot {slot}, user {user}, cell {cell}"
            )));
        }
        Ok(((slot * self.users + (u - 1)) * self.cells + (c - 1)) * self.ant)
    }

    /// The `1 x ant` fading row from `cell`'s array to `user` during `slot`.
    pub fn row(&self, slot: usize, user: u64, cell: u64) -> Result<RowDVector<C64>> {
        let start = self.offset(slot, user, cell)?;
        Ok(RowDVector::from_row_slice(
            &self.entries[start..start + self.ant],
        ))
    }
}
