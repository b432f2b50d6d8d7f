//! Seeded generators with a stream-split rule.
//!
//! `child(seed, index)` is ChaCha8 keyed by `seed` on stream `index`, so
//! children of one seed never share output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ExpRng = ChaCha8Rng;

pub fn rng(seed: u64) -> ExpRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child(seed: u64, index: u64) -> ExpRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}
