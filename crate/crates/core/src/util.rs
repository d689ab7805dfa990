//! Seed-splitting for reproducible sub-streams.
//!
//! Every randomized component draws from a ChaCha stream seeded through
//! [`substream`]. The rule: a sub-draw with tag `t` of a stream seeded `s`
//! uses `splitmix64(s + t * GOLDEN)`. Tags are fixed at call sites, so
//! reordering or parallelizing the draws cannot change any stream.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; a bijection on u64 with good avalanche.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of sub-stream `tag` from `seed`.
pub fn substream(seed: u64, tag: u64) -> u64 {
    splitmix64(seed.wrapping_add(tag.wrapping_mul(GOLDEN)))
}
