//! Seeded generators and reproducible seed derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type EplRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> EplRng {
    ChaCha8Rng::seed_from_u64(seed)
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one unit of work, a pure function of `(master, index, tag)` so
/// results do not depend on scheduling.
pub fn derive_seed(master: u64, index: u64, tag: &str) -> u64 {
    let mut h = mix(master);
    h = mix(h ^ index);
    for b in tag.bytes() {
        h = mix(h ^ u64::from(b));
    }
    h
}
