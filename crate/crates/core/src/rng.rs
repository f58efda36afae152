//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`. ChaCha8 output is specified independently of
//! the platform, so a seed reproduces the same run everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
