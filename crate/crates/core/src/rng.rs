//! Seeded random streams. Every consumer gets its own ChaCha stream keyed by
//! the master seed, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PURIFICATION_STREAM_BASE: u64 = 1 << 32;

/// Stream for elementary link `index`.
pub fn link_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream for stochastic purification outcomes.
pub fn purification_stream(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PURIFICATION_STREAM_BASE);
    rng
}
