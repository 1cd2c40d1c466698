//! Seeded deterministic randomness.
//!
//! Every random choice in this crate derives from a caller-supplied `u64`
//! seed through an independent ChaCha stream per purpose, so runs are
//! reproducible bit for bit and distinct purposes never share draws.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Independent substreams of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Message-store bit generation.
    Messages = 1,
    /// Per-message permutations and per-database query shuffles.
    SchemeRandomness = 2,
    /// XOR-mask vector of the two-database baseline.
    QueryMask = 3,
    /// Fair coin of the grouped and asymmetric baselines.
    Coin = 4,
    /// Pairing choice of the mod-5 baseline.
    Pairing = 5,
    /// Per-trial seed derivation inside the checkers.
    TrialSeeds = 6,
}

/// Deterministic generator for one substream of `seed`.
pub fn stream(seed: u64, stream: Stream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Uniform permutation of `0..len` as a lookup table.
pub fn permutation(rng: &mut ChaCha12Rng, len: usize) -> Vec<u32> {
    debug_assert!(len <= u32::MAX as usize);
    let mut table: Vec<u32> = (0..len as u32).collect();
    table.shuffle(rng);
    table
}

/// `count` independent trial seeds derived from `seed_base`.
///
/// The list depends only on `seed_base`, so callers that iterate over several
/// desired indices see identical seed streams for each index.
pub fn trial_seeds(seed_base: u64, count: usize) -> Vec<u64> {
    use rand::Rng;
    let mut rng = stream(seed_base, Stream::TrialSeeds);
    (0..count).map(|_| rng.random()).collect()
}
