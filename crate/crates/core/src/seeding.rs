//! Deterministic seed derivation and the one RNG used everywhere.
//!
//! Every randomised routine takes an explicit `u64` seed and builds a
//! counter-based ChaCha stream from it. Parallel loops never share an RNG:
//! each unit of work (a trial, a sweep point) derives its own seed from the
//! master seed and its index, so results are independent of worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide RNG.
pub type Rng = ChaCha8Rng;

/// Build the RNG for a given seed.
pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from (master, index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Two-level derivation for (master, arm, index) layouts such as the
/// null/alternative arms of a risk simulation.
pub fn derive_seed2(master: u64, arm: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, arm), index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derived_streams_differ_and_repeat() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }

    #[test]
    fn rng_is_reproducible() {
        let mut r1 = rng_from(42);
        let mut r2 = rng_from(42);
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}
