//! Seed derivation.
//!
//! Every copy draws from its own ChaCha8 stream seeded with
//! `u64::from_le_bytes(SHA-256("copydesc-aug" 0x00 master_seed:u64le source_id 0x00 copy_index:u32le)[0..8])`.
//! Copies are therefore independent of generation order and worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"copydesc-aug";

pub fn copy_seed(master_seed: u64, source_id: &str, copy_index: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update([0u8]);
    h.update(master_seed.to_le_bytes());
    h.update(source_id.as_bytes());
    h.update([0u8]);
    h.update(copy_index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
