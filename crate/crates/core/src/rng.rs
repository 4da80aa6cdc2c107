//! Seed derivation for reproducible, order-independent trial streams.
//!
//! Every trial draws from its own ChaCha8 stream whose 64-bit seed is
//! `mix(master, trial)`. `mix` is the SplitMix64 finalizer applied to
//! `master + GOLDEN * (index + 1)`, so streams do not depend on execution
//! order or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of sub-stream `index` from `master`.
pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// Generator for trial `index` under `master`.
pub fn stream(master: u64, index: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(mix(master, index))
}

/// Generator seeded directly from a recorded stream seed.
pub fn from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}
