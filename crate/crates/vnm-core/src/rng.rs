//! Reproducible random streams.
//!
//! One master seed spawns an enumerable family of independent sub-streams.
//! Every stream is keyed by the triple (master seed, domain, index), so a
//! stream's output never depends on how many draws any other stream consumed.
//! Estimators assign stream `i` to sample `i`, which makes results identical
//! for any worker count or scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Domain separators. Two call sites with different domains never collide,
/// even at equal (seed, index).
pub mod domain {
    pub const ESTIMATE: u64 = 1;
    pub const HOEFFDING: u64 = 2;
    pub const CLI: u64 = 3;
    pub const BINDINGS: u64 = 4;
    pub const TEST: u64 = 99;
}

const TAG: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derive the sub-stream for (master_seed, domain, index).
///
/// ChaCha acts as a PRF of its 256-bit key; distinct key triples yield streams
/// indistinguishable from independent generators.
pub fn substream(master_seed: u64, domain: u64, index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&TAG.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Mix a salt into a master seed to obtain a derived seed for an independent
/// group of sub-streams (for example one group per verification row).
/// SplitMix64 finalizer: bijective, well-spread.
pub fn derive_seed(master_seed: u64, salt: u64) -> u64 {
    let mut z = master_seed ^ salt.wrapping_mul(TAG);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
