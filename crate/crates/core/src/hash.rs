//! SHAKE256 instantiations: the challenge hash `H`, the commitment `com`, and
//! ball sampling into `R_H` (ternary vectors of weight exactly `kappa`).
//!
//! Every use starts with a one-byte domain tag.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::rng::RandomSource;
use crate::zq::IntVector;
use rand_core::RngCore;

pub const TAG_CHALLENGE: u8 = 0x01;
pub const TAG_COMMIT: u8 = 0x02;
pub const TAG_RNG: u8 = 0x03;
pub const TAG_BALL: u8 = 0x04;

/// Fixed-length bit string, bits packed little-endian within bytes; unused
/// high bits of the last byte are zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    bytes: Vec<u8>,
}

impl BitString {
    pub fn from_bytes(len: usize, mut bytes: Vec<u8>) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        if let Some(last) = bytes.last_mut() {
            let extra = bytes_len_bits(len) - len;
            if extra > 0 && *last >> (8 - extra) != 0 {
                return None;
            }
        }
        Some(Self { len, bytes })
    }

    pub fn random(len: usize, rng: &mut RandomSource) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        Self::masked(len, bytes)
    }

    fn masked(len: usize, mut bytes: Vec<u8>) -> Self {
        let extra = bytes_len_bits(len) - len;
        if let Some(last) = bytes.last_mut() {
            if extra > 0 {
                *last &= 0xff >> extra;
            }
        }
        Self { len, bytes }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bytes[i / 8] >> (i % 8) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.bytes[i / 8] ^= 1 << (i % 8);
    }
}

fn bytes_len_bits(len: usize) -> usize {
    len.div_ceil(8) * 8
}

/// Deterministic ternary vector of length `k` with exactly `kappa` entries
/// equal to `+-1`, by Fisher-Yates over the XOF stream of `seed`.
pub fn hash_to_ball(seed: &[u8], k: usize, kappa: usize) -> Vec<i8> {
    assert!(kappa <= k, "ball weight {kappa} exceeds length {k}");
    let mut h = Shake256::default();
    h.update(&[TAG_BALL]);
    h.update(seed);
    let mut xof = h.finalize_xof();
    let mut sign_bytes = vec![0u8; kappa.div_ceil(8)];
    xof.read(&mut sign_bytes);
    let mut c = vec![0i8; k];
    for (n, i) in (k - kappa..k).enumerate() {
        let j = loop {
            let mut b = [0u8; 2];
            xof.read(&mut b);
            let x = u16::from_le_bytes(b) as usize;
            let bound = i + 1;
            // reject the top partial interval so `x % bound` is uniform
            if x < (1 << 16) - (1 << 16) % bound {
                break x % bound;
            }
        };
        c[i] = c[j];
        c[j] = if sign_bytes[n / 8] >> (n % 8) & 1 == 1 { -1 } else { 1 };
    }
    c
}

/// `e' = H(u, c)`.
pub fn challenge_hash(u: &[i64], c: &BitString, k: usize, kappa: usize) -> Vec<i8> {
    let mut h = Shake256::default();
    h.update(&[TAG_CHALLENGE]);
    h.update(&(u.len() as u32).to_le_bytes());
    for &x in u {
        h.update(&(x as u64).to_le_bytes());
    }
    h.update(&(c.len() as u32).to_le_bytes());
    h.update(c.as_bytes());
    let mut seed = [0u8; 32];
    h.finalize_xof().read(&mut seed);
    hash_to_ball(&seed, k, kappa)
}

/// Floor on the commitment length. An `n`-bit commitment binds only `n`
/// bits, which at toy dimensions lets a signature verify for other messages.
pub const COMMIT_MIN_BITS: usize = 256;

/// Length of `com(mu, d')` for dimension `n`: `max(n, 256)` bits.
pub fn commitment_bits(n: usize) -> usize {
    n.max(COMMIT_MIN_BITS)
}

/// `com(mu, d')`: the first `commitment_bits(n)` bits of
/// `XOF(0x02 || len(mu) || mu || d')`.
pub fn commit(mu: &[u8], d: &BitString, n: usize) -> BitString {
    let n = commitment_bits(n);
    let mut h = Shake256::default();
    h.update(&[TAG_COMMIT]);
    h.update(&(mu.len() as u64).to_le_bytes());
    h.update(mu);
    h.update(d.as_bytes());
    let mut out = vec![0u8; n.div_ceil(8)];
    h.finalize_xof().read(&mut out);
    BitString::masked(n, out)
}

pub fn ternary_to_ints(e: &[i8]) -> IntVector {
    e.iter().map(|&x| x as i64).collect()
}

/// Membership in `R_H`: entries in `{-1, 0, 1}`, at most `kappa` nonzero.
pub fn in_challenge_ball(e: &[i64], k: usize, kappa: usize) -> bool {
    e.len() == k && e.iter().all(|x| (-1..=1).contains(x)) && e.iter().filter(|&&x| x != 0).count() <= kappa
}
