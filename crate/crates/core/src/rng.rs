//! Seeded random streams.
//!
//! Every stochastic routine in the crate takes `&mut R where R: Rng`; the
//! concrete generator used by the pipelines is [`AugRng`] (ChaCha8), which
//! produces the same stream on every platform for a given seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type AugRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> AugRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a sequence of words. Used to derive per-job seeds
/// so results do not depend on scheduling order.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C908u64, |acc, &p| mix64(acc ^ mix64(p)))
}
