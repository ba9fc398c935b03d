//! Seeded random streams.
//!
//! Generator: ChaCha20 (RFC 8439 block function as implemented by
//! `rand_chacha`) keyed with the 64-bit seed in little-endian order followed
//! by 24 zero bytes. Each consumer reads its own stream id, so belief draws
//! never shift the outcome sequence. A uniform deviate is
//! `(next_u64 >> 11) * 2^-53`, which lies in `[0, 1)`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Identifier written into every simulation record.
pub const RNG_ALGORITHM: &str = "chacha20-le64key-u53/v1";

/// Stream carrying one deviate per round for the outcome draw.
pub const OUTCOME_STREAM: u64 = 0;
/// Stream carrying one deviate per agent for belief initialization.
pub const BELIEF_STREAM: u64 = 1;

pub struct Stream(ChaCha20Rng);

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
