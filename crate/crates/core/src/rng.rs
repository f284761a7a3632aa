//! Seeded stream derivation.
//!
//! Every random stream in a run is derived from the master seed plus a
//! purpose tag, so parallel runs and the different consumers within one run
//! (traffic, agent exploration, baseline decisions) never share a stream.
//! ChaCha8 is used because its output is fixed by the algorithm, which keeps
//! golden files stable across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over a byte slice; stable, dependency-free mixing for stream ids.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Derive an independent, reproducible rng stream from `(master_seed, tag)`.
pub fn derive_stream(master_seed: u64, tag: &str) -> ChaCha8Rng {
    let mut bytes = Vec::with_capacity(8 + tag.len());
    bytes.extend_from_slice(&master_seed.to_le_bytes());
    bytes.extend_from_slice(tag.as_bytes());
    ChaCha8Rng::seed_from_u64(fnv1a(&bytes))
}
