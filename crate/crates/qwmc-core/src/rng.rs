//! Deterministic seed derivation.
//!
//! Every stochastic routine takes a single `u64` seed and derives
//! independent child streams from it with [`child_seed`].  Work split
//! across threads draws from per-chunk children keyed by chunk index, so
//! results are identical no matter how many threads execute the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates consecutive seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for child stream `index` of the stream keyed by `parent`.
pub fn child_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index.wrapping_add(1)))
}

/// The generator used everywhere randomness is needed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
