//! Seed derivation. Every stochastic operation takes an explicit seed and
//! draws from a ChaCha8 stream, so runs are reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent child seed for `(base, tag)`.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(base) ^ tag.rotate_left(17) ^ 0x5851_F42D_4C95_7F2D)
}

/// Child seed keyed by arbitrary text.
pub fn text_seed(base: u64, text: &str) -> u64 {
    let digest = Sha256::digest(text.as_bytes());
    let mut tag = [0u8; 8];
    tag.copy_from_slice(&digest[..8]);
    derive_seed(base, u64::from_le_bytes(tag))
}
