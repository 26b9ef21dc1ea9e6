//! Shared fixtures for the criterion benches.

use indel::{gen_pair, CorpusModel, Sequence};

/// A random-model pair with the given shape; panics on invalid parameters.
pub fn fixture(n: usize, a: u32, rate: f64, seed: u64) -> (Sequence, Sequence) {
    let (x, y, _) = gen_pair(CorpusModel::Rpes, n, a, rate, rate, seed).expect("valid fixture parameters");
    (x, y)
}
