use crate::error::{Error, Result};

/// An odd prime modulus below 2^62.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus(u64);

impl Modulus {
    pub const MAX: u64 = 1 << 62;

    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || q.is_multiple_of(2) || q >= Self::MAX || !is_prime_u64(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self(q))
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    /// Number of bits needed to write residues, i.e. `ceil(log2 q)`.
    pub fn bits(self) -> u32 {
        64 - (self.0 - 1).leading_zeros()
    }

    pub fn log2(self) -> f64 {
        (self.0 as f64).log2()
    }

    /// Canonical residue in `[0, q)`.
    #[inline]
    pub fn reduce(self, x: i128) -> i64 {
        x.rem_euclid(self.0 as i128) as i64
    }

    #[inline]
    pub fn reduce_i64(self, x: i64) -> i64 {
        x.rem_euclid(self.0 as i64)
    }

    /// Representative in `(-q/2, q/2]`.
    #[inline]
    pub fn center(self, x: i64) -> i64 {
        let q = self.0 as i64;
        let r = x.rem_euclid(q);
        if r > q / 2 {
            r - q
        } else {
            r
        }
    }

    #[inline]
    pub fn mul(self, a: i64, b: i64) -> i64 {
        ((a as i128 * b as i128).rem_euclid(self.0 as i128)) as i64
    }

    #[inline]
    pub fn add(self, a: i64, b: i64) -> i64 {
        self.reduce(a as i128 + b as i128)
    }

    #[inline]
    pub fn sub(self, a: i64, b: i64) -> i64 {
        self.reduce(a as i128 - b as i128)
    }

    /// Inverse of a nonzero residue (Fermat).
    pub fn inv(self, a: i64) -> Option<i64> {
        let a = self.reduce_i64(a);
        if a == 0 {
            return None;
        }
        Some(pow_mod(a as u64, self.0 - 2, self.0) as i64)
    }
}

pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), trial(n), "n = {n}");
        }
        assert!(is_prime_u64(12289));
        assert!(is_prime_u64((1 << 61) - 1));
        // strong pseudoprime to bases 2..=11
        assert!(!is_prime_u64(3_215_031_751));
    }

    #[test]
    fn rejects_even_small_and_composite() {
        for q in [0, 1, 2, 4, 9, 255, 1 << 62] {
            assert!(Modulus::new(q).is_err(), "q = {q}");
        }
        assert_eq!(Modulus::new(257).unwrap().bits(), 9);
        assert_eq!(Modulus::new(12289).unwrap().bits(), 14);
    }

    #[test]
    fn residue_helpers() {
        let q = Modulus::new(7).unwrap();
        assert_eq!(q.reduce(-1), 6);
        assert_eq!(q.center(6), -1);
        assert_eq!(q.center(3), 3);
        assert_eq!(q.mul(q.inv(3).unwrap(), 3), 1);
        assert_eq!(q.inv(14), None);
    }
}
