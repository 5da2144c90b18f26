//! Seedable random streams.
//!
//! Every stochastic routine in the crate draws from [`SimRng`], a ChaCha8
//! generator keyed by a 64-bit seed. Parallel workers that share a seed are
//! separated by stream number: stream `s` of seed `x` never overlaps stream
//! `t != s` of the same seed, so a sweep can hand worker `i` the stream `i`
//! and still reproduce bit-for-bit on one thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for `seed`, stream 0.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for `seed` on an independent `stream`.
pub fn seeded_stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
