//! Deterministic generator derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a base
//! seed plus a short path of integers (epoch, triplet index, entity index,
//! ...). Streams for different paths are independent of each other and of
//! the order in which they are created, which is what lets parallel and
//! sequential execution agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Kept distinct so that e.g. relation init and entity init
/// never share a stream.
pub mod stream {
    pub const ENTITY_INIT: u64 = 1;
    pub const RELATION_INIT: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const CORRUPTION: u64 = 4;
    pub const DEV_NEGATIVES: u64 = 5;
    pub const TEST_NEGATIVES: u64 = 6;
    pub const GRADCHECK: u64 = 7;
    pub const FIXTURE: u64 = 8;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `path` into `base` to produce a 64-bit seed.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, path))
}
