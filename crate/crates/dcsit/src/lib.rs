//! Exact degrees-of-freedom (DoF) analysis for multi-cell MISO downlinks with
//! delayed channel state information at the transmitters (delayed CSIT).
//!
//! The library covers the full pipeline from closed-form DoF values to
//! end-to-end protocol simulation:
//!
//! - [`exactnum`]: arbitrary-precision rationals plus the combinatorial
//!   primitives (binomials, lcm, integer compositions) the formulas consume.
//! - [`dofmath`]: every DoF expression evaluated exactly — the MAT recursion
//!   and its truncations, the uncoupled-MAT (uMAT) bound for `C` cells of `L`
//!   users, the HC interference-channel baseline, the cooperative upper
//!   bound, gap and time-sharing transforms.
//! - [`schedule`]: materializes the per-phase round/slot structure behind the
//!   uMAT bound — rounds `R_p`, slots `S_p`, repetitions `nu_p`, the scaling
//!   factor lambda, symbols per user `b`, and the full served-group round
//!   plan consumed by the simulator.
//! - [`cmatrix`]: dense complex matrices with SVD-based numerical rank and
//!   row-span containment tests.
//! - [`simengine`]: noise-free simulation of the transmission schemes over
//!   random block-fading channels, enforcing the delayed-CSIT constraint,
//!   rebuilding precoders from overheard interference, and deciding
//!   decodability by zero-forcing rank tests.
//!
//! Everything upstream of the simulator is exact: DoF values are reduced
//! rationals, never floats. The simulator is the independent check that the
//! exact values are actually achievable by a linear scheme.
//!
//! # Example
//!
//! ```
//! use dcsit::dofmath;
//! use dcsit::exactnum::rational;
//!
//! // Six single-antenna users, scheme truncated to three phases.
//! assert_eq!(dofmath::dof_mat_truncated(6, 3).unwrap(), rational(36, 17));
//! // Two cells of two users each, cross-cell interference uncoupled.
//! assert_eq!(dofmath::dof_umat(2, 2).unwrap(), rational(8, 5));
//! ```

pub mod cmatrix;
pub mod dofmath;
pub mod exactnum;
pub mod schedule;
pub mod simengine;

use thiserror::Error;

/// Unified error type for the whole library.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on arguments was violated (out-of-range parameter,
    /// dimension mismatch, unsupported variant combination).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two independent computations of the same quantity disagreed.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    /// A numerical kernel failed (SVD non-convergence, non-finite entries).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A precoder builder could not find the overheard-interference records
    /// the schedule promised it; indicates a scheduling bug, never padded.
    #[error("protocol construction failure: {0}")]
    Protocol(String),

    /// A transmitter-side builder read channel state it cannot have yet.
    #[error("delayed-CSIT audit violation: {0}")]
    Audit(String),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
