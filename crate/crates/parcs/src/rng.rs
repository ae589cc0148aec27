//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! seed is derived from a master seed and a context path (sensor index, row
//! index, trial index, ...). Substreams for different paths are independent
//! for practical purposes and can be generated in any order, which keeps
//! parallel trial execution reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a context path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0x6a09_e667_f3bc_c909);
    for (i, &p) in path.iter().enumerate() {
        h = splitmix64(h ^ p ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    h
}

/// ChaCha8 stream for the given master seed and context path.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
