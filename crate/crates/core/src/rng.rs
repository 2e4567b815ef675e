//! Seed derivation for reproducible parallel sampling.
//!
//! Every stream is a ChaCha8 generator keyed by the user seed; independent
//! work items (trials, sample blocks, instances) get their own stream id so
//! results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for work item `index` under `seed`.
pub fn derived(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
