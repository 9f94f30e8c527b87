//! Seed splitting.
//!
//! Every random draw in the crate descends from one 64-bit master seed.
//! A child seed is `mix(master + (stream + 1) * GOLDEN)`, where `mix` is the
//! SplitMix64 finalizer and `stream` is a fixed counter naming the consumer
//! (see the `streams` constants). Child seeds key a ChaCha8 generator, so
//! results never depend on call order across consumers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub type Rng = ChaCha8Rng;

/// Stream counters. Per-item streams add an index to the base value.
pub mod streams {
    pub const GENERATOR: u64 = 0x1000;
    pub const GENERATOR_NOISE: u64 = 0x2000;
    pub const SPLIT: u64 = 0x3000;
    pub const INIT: u64 = 0x4000;
    pub const META: u64 = 0x5000;
    pub const TREE: u64 = 0x6000;
    pub const EVAL: u64 = 0x7000;
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of `stream` from `seed`.
pub fn split(seed: u64, stream: u64) -> u64 {
    mix(seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn rng_for(seed: u64, stream: u64) -> Rng {
    Rng::seed_from_u64(split(seed, stream))
}
