//! Seed derivation and the random streams used throughout the crate.
//!
//! Every random object is generated from a `ChaCha8Rng` keyed by a 64-bit seed.
//! Sub-streams are derived with a SplitMix64 chain, so a stream depends only on
//! the base seed and its labels, never on scheduling or on how many other
//! streams were drawn. Normal variates come from `rand_distr::StandardNormal`
//! (Ziggurat), which is deterministic across platforms for a fixed stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type DemixRng = ChaCha8Rng;

/// Stream labels for the pieces of a single trial.
pub mod stream {
    pub const SIGNAL: u64 = 0x5349_474e;
    pub const OPERATOR: u64 = 0x4f50_4552;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const DIAGNOSTICS: u64 = 0x4449_4147;
    pub const ROW: u64 = 0x524f_5753;
}

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `labels` into `base` one at a time: `h <- splitmix64(h ^ splitmix64(label))`.
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(base), |h, &l| splitmix64(h ^ splitmix64(l)))
}

pub fn rng_from_seed(seed: u64) -> DemixRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
pub fn standard_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
