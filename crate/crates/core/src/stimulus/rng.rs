//! Portable seeded randomness.
//!
//! Every draw uses ChaCha8 (the `rand_chacha` stream cipher RNG) keyed by the
//! 64-bit run seed through `seed_from_u64`, with the draw index selecting the
//! ChaCha stream. Draw `i` of seed `s` is therefore reproducible on any
//! platform and independent of how many other draws were taken before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RngState = ChaCha8Rng;

/// RNG for draw `draw_index` of run `seed`.
pub fn draw_rng(seed: u64, draw_index: u64) -> RngState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw_index);
    rng
}

/// Uniform on the closed interval `[lo, hi]` (returns `lo` when equal).
pub fn uniform(rng: &mut RngState, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..=range[1])
    }
}

pub fn uniform_usize(rng: &mut RngState, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}
