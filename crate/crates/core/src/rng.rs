//! Random streams for stochastic runs.
//!
//! All randomness comes from `Xoshiro256PlusPlus`, seeded through SplitMix64
//! (`seed_from_u64`). Independent streams for replicated runs are obtained by
//! applying the generator's `jump` (2^128 steps) `index` times to the base
//! stream, so replicate `i` of seed `s` never overlaps replicate `j != i`.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

/// Base stream for a seed.
pub fn from_seed(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// The `index`-th independent stream derived from `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = from_seed(seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}
