//! Seed handling.
//!
//! A signal is fully determined by one 64-bit master seed. Each consumer of
//! randomness reads from its own ChaCha8 stream keyed by that seed, so the
//! streams are disjoint and adding a consumer never shifts another one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams used during generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Kernels = 0,
    Phases = 1,
    Noise = 2,
    ArrhythmiaPhases = 3,
    ArrhythmiaNoise = 4,
    SicknessPhases = 5,
    SicknessNoise = 6,
}

/// Generator for one stream of a master seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    indexed_rng(seed, stream as u64)
}

/// Generator for an arbitrary stream index, e.g. a Monte Carlo replication.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds from (seed, index) tuples.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a path of indices below `seed`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |acc, &i| mix64(acc ^ mix64(i)))
}

/// Fresh seed from OS entropy.
#[cfg(feature = "entropy")]
pub fn entropy_seed() -> u64 {
    rand::random()
}
