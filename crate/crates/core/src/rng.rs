//! Random number streams.
//!
//! Every simulation draws from [`SimRng`], ChaCha with 8 rounds seeded from a
//! single `u64`. Streams for sweep cells are derived with [`stream_seed`], a
//! pure function of the master seed and the cell coordinates, so results do
//! not depend on how cells are scheduled. Stream contents are stable within a
//! build; they are not promised to survive upgrades of the `rand_chacha`
//! crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn sim_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replicate `replicate` of grid point `grid` under `master`.
pub fn stream_seed(master: u64, grid: u64, replicate: u64) -> u64 {
    mix(mix(mix(master) ^ grid) ^ replicate.rotate_left(32))
}

/// Exponential waiting time with the given total rate.
pub(crate) fn exp_wait<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    // 1 - U lies in (0, 1], so the log is finite.
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}
