//! Deterministic seed derivation.
//!
//! Every random procedure in the crate is driven by [`rand_chacha::ChaCha12Rng`]
//! seeded from an explicit 64-bit seed, so runs are reproducible across
//! platforms and worker counts. Parallel sub-tasks (replications, resampling
//! trials) use per-index seeds derived with [`derive_seed`], a SplitMix64 mix
//! of the master seed and the sub-task index.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One SplitMix64 output step.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed for sub-task `index` of a procedure seeded with `seed`.
///
/// The mapping is injective in `index` for a fixed seed and avalanches in
/// both arguments, so distinct sub-tasks get statistically independent
/// streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed).wrapping_add(splitmix64(index ^ 0xa076_1d64_78bd_642f)))
}

/// The crate-standard generator for an explicit 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_is_deterministic_and_spreads() {
        assert_eq!(derive_seed(42, 0), derive_seed(42, 0));
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 0), derive_seed(43, 0));
        // no short cycles among the first few indices
        let mut seen: Vec<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 1000);
    }
}
