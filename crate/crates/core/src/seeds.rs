//! Deterministic seed derivation: every random choice in a run comes from
//! the master seed, a domain tag and a trial index.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub fn derive(master: &[u8; 32], domain: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ldc-forge/seed");
    h.update(master);
    h.update((domain.len() as u64).to_be_bytes());
    h.update(domain.as_bytes());
    h.update(index.to_be_bytes());
    h.finalize().into()
}

pub fn rng(master: &[u8; 32], domain: &str, index: u64) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(derive(master, domain, index))
}

/// Master seed from a small integer, for configs that give a plain number.
pub fn master_from_u64(seed: u64) -> [u8; 32] {
    derive(&[0; 32], "master", seed)
}
