//! Deterministic derivation of independent seed streams from one master seed.
//!
//! Every random choice in the crate draws from a ChaCha stream whose seed is a
//! SplitMix64 mix of the master seed and a fixed stream tag, so runs are
//! reproducible from `(seed, params, input order)` alone and adding a consumer
//! never perturbs existing streams.

/// Stream tags. Each (tag, index) pair owns a disjoint seed stream.
pub mod stream {
    /// Per-tree training stream: tie-breaks taken while training.
    pub const TRAIN: u64 = 1;
    /// Per-tree base for ephemeral query-time tie-break streams.
    pub const TIE: u64 = 2;
    /// Per-tree shuffle of initial (or, offline, all) training points.
    pub const SHUFFLE: u64 = 3;
    /// Held-out query batches drawn beside a synthetic training stream.
    pub const QUERY: u64 = 4;
}

/// SplitMix64 mix of a seed and a stream index.
pub fn split(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `tag` of tree `tree` under `master`.
pub fn tree_stream(master: u64, tag: u64, tree: usize) -> u64 {
    split(split(master, tag), tree as u64)
}
