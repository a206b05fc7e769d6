//! Named seed derivation.
//!
//! Every random stream in the crate is derived from a master seed plus a
//! path of integers (stream label, generation, individual, episode, ...).
//! Derivation is a pure function, so results never depend on the order in
//! which streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels used as the first path component.
pub mod label {
    pub const INIT_POPULATION: u64 = 0x01;
    pub const VARIATION: u64 = 0x02;
    pub const EVALUATION: u64 = 0x03;
    pub const TOPOLOGY: u64 = 0x04;
    pub const SWEEP: u64 = 0x05;
    pub const STUDY: u64 = 0x06;
}

pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a path of integers.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_rng(base: u64, path: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(base, path))
}
