//! Deterministic randomness.
//!
//! A seeded [`RandomSource`] is the SHAKE256 output stream of
//! `0x03 || seed (32 bytes) || domain (u64 LE)`. Two sources with the same seed
//! and domain produce identical byte streams on every platform.

use rand_core::{RngCore, TryRngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::hash::TAG_RNG;

pub const SEED_LEN: usize = 32;
pub type Seed = [u8; SEED_LEN];

pub struct RandomSource {
    seed: Seed,
    domain: u64,
    reader: <Shake256 as ExtendableOutput>::Reader,
}

impl std::fmt::Debug for RandomSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RandomSource").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl RandomSource {
    pub fn from_seed(seed: Seed) -> Self {
        Self::with_domain(seed, 0)
    }

    pub fn with_domain(seed: Seed, domain: u64) -> Self {
        let mut h = Shake256::default();
        h.update(&[TAG_RNG]);
        h.update(&seed);
        h.update(&domain.to_le_bytes());
        Self { seed, domain, reader: h.finalize_xof() }
    }

    /// Seeded from operating-system entropy.
    pub fn from_entropy() -> Self {
        let mut seed = [0u8; SEED_LEN];
        rand_core::OsRng
            .try_fill_bytes(&mut seed)
            .expect("operating system entropy source unavailable");
        Self::from_seed(seed)
    }

    /// Independent stream for a sub-task, keyed by `domain`.
    pub fn fork(&self, domain: u64) -> Self {
        let mut h = Shake256::default();
        h.update(&[TAG_RNG]);
        h.update(&self.seed);
        h.update(&self.domain.to_le_bytes());
        h.update(&domain.to_le_bytes());
        let mut child = [0u8; SEED_LEN];
        h.finalize_xof().read(&mut child);
        Self::from_seed(child)
    }

    pub fn next_seed(&mut self) -> Seed {
        let mut s = [0u8; SEED_LEN];
        self.reader.read(&mut s);
        s
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        let mut b = [0u8; 4];
        self.reader.read(&mut b);
        u32::from_le_bytes(b)
    }

    fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.reader.read(&mut b);
        u64::from_le_bytes(b)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.reader.read(dst);
    }
}

pub fn parse_seed_hex(s: &str) -> Result<Seed, String> {
    let bytes = hex::decode(s.trim()).map_err(|e| format!("seed is not hex: {e}"))?;
    bytes
        .try_into()
        .map_err(|b: Vec<u8>| format!("seed must be 32 bytes (64 hex chars), got {}", b.len()))
}
