//! Seeded random streams.
//!
//! Every consumer of randomness in a run draws from its own ChaCha8 stream
//! derived from one run seed, so changing how much randomness one component
//! consumes never shifts another's.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream numbers used by the training loop.
pub mod streams {
    pub const ENV: u64 = 0;
    pub const POLICY: u64 = 1;
    pub const SAMPLER: u64 = 2;
    pub const CLUSTERING: u64 = 3;
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
