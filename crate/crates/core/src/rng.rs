//! Seeded randomness.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! 64-bit value. Ensembles derive per-item seeds with [`sub_seed`], so the
//! value for item `k` does not depend on how many items were drawn before it
//! or on which worker thread ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DetRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> DetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of item `index` in stream `stream` from a master seed.
pub fn sub_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(mix64(master) ^ stream) ^ index)
}

/// Stream tags keeping unrelated draws apart.
pub mod stream {
    pub const INSTANCE: u64 = 0x696e_7374;
    pub const OPTIMIZER: u64 = 0x6f70_7469;
    pub const SHOTS: u64 = 0x7368_6f74;
    pub const START: u64 = 0x7374_6172;
}
