//! Seed derivation for reproducible, order-independent replication batches.
//!
//! Every randomized routine takes an explicit `u64` seed. Batches derive one
//! sub-seed per task with [`subseed`], so replications can run in parallel
//! and still produce results identical to a serial run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Bijective on u64, decorrelates consecutive inputs.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for stream `stream` of a batch rooted at `root`.
///
/// The rule is `splitmix64(root + (stream + 1) * golden)`, documented here so
/// external tooling can reproduce any single replication in isolation.
pub fn subseed(root: u64, stream: u64) -> u64 {
    splitmix64(root.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Deterministic generator for a given seed. ChaCha8 is platform-stable, so
/// traces reproduce bit-for-bit across machines.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subseeds_are_distinct_and_stable() {
        let a = subseed(42, 0);
        let b = subseed(42, 1);
        let c = subseed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, subseed(42, 0));
    }

    #[test]
    fn generator_is_reproducible() {
        use rand::RngCore;
        let mut r1 = rng_from_seed(7);
        let mut r2 = rng_from_seed(7);
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}
