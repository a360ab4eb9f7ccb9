//! Per-trial random streams.
//!
//! Every trial owns ChaCha8 streams keyed by the master seed and numbered by
//! `(point, trial, purpose)`, so its draws never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest number of sweep points (SNR values or user counts).
pub const MAX_POINTS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Channel realization and data bits.
    Channel = 0,
    /// Receiver noise.
    Noise = 1,
    /// Randomized solvers.
    Solver = 2,
    /// Channel draw of a complexity measurement.
    ComplexityChannel = 3,
    /// Solver randomness of a complexity measurement.
    ComplexitySolver = 4,
}

/// Stream for `(point, trial, purpose)` under `master`.
pub fn trial_rng(master: u64, point: usize, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    debug_assert!(point < MAX_POINTS && trial <= u32::MAX as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((point as u64) << 40) | (trial << 8) | purpose as u64);
    rng
}
