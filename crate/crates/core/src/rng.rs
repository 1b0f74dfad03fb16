//! Counter-based randomness.
//!
//! Every random stream is keyed on the master seed plus a tuple of integers
//! (frame index, vehicle id, channel, ...). Evaluating the streams in any order
//! or in parallel yields identical draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit key.
pub fn key(seed: u64, parts: &[u64]) -> u64 {
    let mut h = mix64(seed ^ GOLDEN);
    for (i, &p) in parts.iter().enumerate() {
        h = mix64(h ^ p.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)));
    }
    h
}

/// Stable 64-bit tag for a module or stream name (FNV-1a).
pub fn tag(name: &str) -> u64 {
    fnv1a64(name.as_bytes())
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Sub-seed for a named module derived from a master seed.
pub fn derive_seed(master: u64, module: &str) -> u64 {
    key(master, &[tag(module)])
}

/// A fresh generator for the keyed stream.
pub fn stream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(key(seed, parts))
}
