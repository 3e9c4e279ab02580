//! Seeded, splittable random streams.
//!
//! Every run draws from a [`ChaCha8Rng`]. A replicate is addressed by
//! `(base_seed, cell, replicate)`: the key comes from `base_seed` and the
//! 64-bit stream id is `(cell << 32) | replicate`. Streams never overlap, so
//! replicates can run in any order or in parallel and still produce the same
//! numbers.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SimRng;

/// Generator for a single stand-alone run.
pub fn from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for replicate `replicate` of parameter cell `cell`.
pub fn replicate_rng(base_seed: u64, cell: u32, replicate: u32) -> SimRng {
    let mut rng = SimRng::seed_from_u64(base_seed);
    rng.set_stream(stream_id(cell, replicate));
    rng
}

pub fn stream_id(cell: u32, replicate: u32) -> u64 {
    (u64::from(cell) << 32) | u64::from(replicate)
}
