//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from the
//! experiment seed mixed with a small tuple of stream identifiers (agent id,
//! round, shard index ...). Results therefore never depend on thread
//! scheduling or on the order in which streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

// Stream domains, so that e.g. (agent 1, round 2) of the training stream
// never collides with the channel stream.
pub const DOMAIN_INIT: u64 = 0x494e_4954;
pub const DOMAIN_PARTITION: u64 = 0x5041_5254;
pub const DOMAIN_TRAIN: u64 = 0x0054_524e;
pub const DOMAIN_CHANNEL: u64 = 0x4348_414e;
pub const DOMAIN_MONTE_CARLO: u64 = 0x4d43;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `seed` with a list of stream identifiers into a new 64-bit seed.
pub fn derive_seed(seed: u64, ids: &[u64]) -> u64 {
    ids.iter()
        .fold(splitmix64(seed), |acc, &id| splitmix64(acc ^ splitmix64(id)))
}

pub fn stream(seed: u64, ids: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, ids))
}
