//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator seeded by
//! mixing a user seed with a tuple of stream keys (step, sample index, ...),
//! so results never depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with stream keys into a single 64-bit seed.
pub fn mix_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// A generator for the substream `(seed, keys...)`.
pub fn substream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, keys))
}

/// Stream tags so that different consumers of one seed never collide.
pub(crate) mod tag {
    pub const DISORDER: u64 = 0xd150;
    pub const INIT: u64 = 0x1417;
    pub const SAMPLE: u64 = 0x5a3b;
    pub const SYMMETRY: u64 = 0x5e77;
}
