//! Seed derivation and per-row random streams.
//!
//! Every sampling routine takes an explicit 64-bit seed. Independent pieces of
//! work (rows of a design, trials of an experiment, restarts of an ascent) get
//! their own stream so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a purpose tag and an index.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ mix64(tag)).wrapping_add(index))
}

/// Generator for a single seed.
pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for substream `stream` of `seed` (ChaCha stream id).
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Purpose tags used with [`derive_seed`].
pub(crate) mod tags {
    pub const DESIGN: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const MISFIT: u64 = 3;
    pub const COEFFICIENTS: u64 = 4;
    pub const TRIAL: u64 = 5;
    pub const MONTE_CARLO: u64 = 6;
    pub const ASCENT: u64 = 7;
    pub const PROBES: u64 = 8;
    pub const VERIFY: u64 = 9;
}
