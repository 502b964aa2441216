//! Seeded random number generation.
//!
//! Every stochastic routine takes an explicit `u64` seed and builds its own
//! ChaCha8 stream, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for iteration `i` of a repeated experiment starting at `base`.
pub fn iteration_seed(base: u64, i: usize) -> u64 {
    base.wrapping_add(i as u64)
}
