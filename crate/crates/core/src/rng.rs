//! Counter-addressed random streams.
//!
//! Every random draw in the crate comes from a stream keyed by
//! `(master seed, purpose label, index)`. A stream's key is the SHA-256 digest
//! of those three values and seeds a ChaCha8 generator, so streams can be
//! created in any order, on any thread, and always produce the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

fn digest(seed: u64, label: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// Generator for stream `(seed, label, index)`.
pub fn stream_rng(seed: u64, label: &str, index: u64) -> StreamRng {
    ChaCha8Rng::from_seed(digest(seed, label, index))
}

/// Child master seed for nested experiments, e.g. one per Monte Carlo replicate.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let d = digest(seed, label, index);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}
