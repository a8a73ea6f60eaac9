//! Deterministic sub-seed derivation.
//!
//! Every random stream in the pipeline (per dimension, per lens, per tree,
//! per fold) gets its own seed derived from its parent seed and an index, so
//! results never depend on the order in which parallel work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of child stream `index` of `parent`.
pub fn derive(parent: u64, index: u64) -> u64 {
    mix(mix(parent ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(index.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}

/// Domain tags keep streams that share a parent and index apart.
pub(crate) mod tag {
    pub const DIMENSION: u64 = 0x01;
    pub const LENS_DRAW: u64 = 0x02;
    pub const LENS_MODEL: u64 = 0x03;
    pub const VALIDATION: u64 = 0x04;
}

pub(crate) fn derive_tagged(parent: u64, tag: u64, index: u64) -> u64 {
    derive(derive(parent, tag), index)
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
