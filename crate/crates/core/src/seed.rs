//! Deterministic seed derivation.
//!
//! Every random choice in the toolkit flows from a single root seed. Each
//! stage derives its own stream as `splitmix64(root ^ fnv1a(tag))`, optionally
//! mixed with an index for per-record / per-epoch streams. The rule is fixed
//! and platform-independent, so identical `(seed, tag, index)` triples always
//! reproduce identical byte streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the sub-seed for a named stage.
pub fn derive(root: u64, tag: &str) -> u64 {
    splitmix64(root ^ fnv1a(tag.as_bytes()))
}

/// Derives the sub-seed for the `index`-th item of a named stage.
pub fn derive_indexed(root: u64, tag: &str, index: u64) -> u64 {
    splitmix64(derive(root, tag) ^ splitmix64(index))
}

/// Seeded RNG for a named stage.
pub fn rng(root: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(root, tag))
}

/// Seeded RNG for the `index`-th item of a named stage.
pub fn rng_indexed(root: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_indexed(root, tag, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn stable_across_calls() {
        assert_eq!(derive(42, "synth"), derive(42, "synth"));
        assert_ne!(derive(42, "synth"), derive(42, "train"));
        assert_ne!(derive(42, "synth"), derive(43, "synth"));
    }

    #[test]
    fn indexed_streams_differ() {
        let a = derive_indexed(7, "records", 0);
        let b = derive_indexed(7, "records", 1);
        assert_ne!(a, b);
    }

    #[test]
    fn rng_reproducible() {
        let mut r1 = rng(99, "init");
        let mut r2 = rng(99, "init");
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}
