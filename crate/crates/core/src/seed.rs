//! Seed derivation. Every random stream in the crate is keyed by an explicit
//! base seed plus a path of tags, so paired runs can share or separate
//! randomness deliberately.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn derive(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Tags for the independent sample streams used by the certification
/// algorithms.
pub(crate) mod stream {
    pub const CLASSIFIER: u64 = 1;
    pub const THRESHOLD: u64 = 2;
    pub const BOUND: u64 = 3;
    pub const UPPER: u64 = 4;
}

/// Public seed derivation for callers that need the same mixing, e.g. grid
/// drivers keying a cell by its coordinates.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    derive(base, tags)
}
