//! Seed derivation for reproducible parallel experiments.
//!
//! Replications of an experiment each own an independent substream derived
//! from a root seed by a fixed splitting rule, so results do not depend on
//! the parallelism degree or scheduling order:
//!
//! ```text
//! substream(root, i) = splitmix64(root XOR splitmix64((i + 1) * GOLDEN))
//! ```

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; bijective on u64.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th substream under `root`.
pub fn substream_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Deterministic generator for the `index`-th substream under `root`.
pub fn substream_rng(root: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(root, index))
}

/// Generator seeded directly from a root seed (substream 0).
pub fn root_rng(root: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(root)
}
