//! Exact determinants of integer matrices.
//!
//! Rows or columns with a single nonzero entry are expanded away first (the
//! bases produced by basis extension are mostly such unit rows); the remaining
//! dense core is handled by multi-modular elimination over 31-bit primes,
//! recombined with the CRT once the product of primes exceeds twice the
//! Hadamard bound. The result is exact.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::modulus::{is_prime_u64, pow_mod};
use super::{IntMatrix, Modulus};

/// `|det M|` for a square integer matrix.
pub fn abs_determinant(m: &IntMatrix) -> BigUint {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let (factor, core) = match peel_singletons(m) {
        Some(p) => p,
        None => return BigUint::zero(),
    };
    if core.rows() == 0 {
        return factor;
    }
    factor * multimodular_det(&core).magnitude()
}

/// Expands along rows/columns holding exactly one nonzero entry. Returns the
/// product of the expanded entries (absolute) and the remaining core, or
/// `None` if a zero row or column shows the determinant is zero.
fn peel_singletons(m: &IntMatrix) -> Option<(BigUint, IntMatrix)> {
    let n = m.rows();
    let mut row_alive = vec![true; n];
    let mut col_alive = vec![true; n];
    let mut row_cnt = vec![0usize; n];
    let mut col_cnt = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] != 0 {
                row_cnt[i] += 1;
                col_cnt[j] += 1;
            }
        }
    }
    if row_cnt.contains(&0) || col_cnt.contains(&0) {
        return None;
    }
    let mut factor = BigUint::one();
    let mut queue: Vec<(bool, usize)> = (0..n)
        .filter(|&i| row_cnt[i] == 1)
        .map(|i| (true, i))
        .chain((0..n).filter(|&j| col_cnt[j] == 1).map(|j| (false, j)))
        .collect();
    while let Some((is_row, idx)) = queue.pop() {
        let (i, j) = if is_row {
            if !row_alive[idx] || row_cnt[idx] != 1 {
                continue;
            }
            let j = (0..n).find(|&j| col_alive[j] && m[(idx, j)] != 0)?;
            (idx, j)
        } else {
            if !col_alive[idx] || col_cnt[idx] != 1 {
                continue;
            }
            let i = (0..n).find(|&i| row_alive[i] && m[(i, idx)] != 0)?;
            (i, idx)
        };
        factor *= m[(i, j)].unsigned_abs();
        row_alive[i] = false;
        col_alive[j] = false;
        for r in 0..n {
            if row_alive[r] && m[(r, j)] != 0 {
                row_cnt[r] -= 1;
                match row_cnt[r] {
                    0 => return None,
                    1 => queue.push((true, r)),
                    _ => {}
                }
            }
        }
        for c in 0..n {
            if col_alive[c] && m[(i, c)] != 0 {
                col_cnt[c] -= 1;
                match col_cnt[c] {
                    0 => return None,
                    1 => queue.push((false, c)),
                    _ => {}
                }
            }
        }
    }
    let rows: Vec<usize> = (0..n).filter(|&i| row_alive[i]).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| col_alive[j]).collect();
    let core = IntMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])]);
    Some((factor, core))
}

fn hadamard_bits(m: &IntMatrix) -> f64 {
    let n = m.rows();
    let by_cols: f64 = (0..n)
        .map(|j| 0.5 * (0..n).map(|i| (m[(i, j)] as f64).powi(2)).sum::<f64>().log2())
        .sum();
    let by_rows: f64 = (0..n)
        .map(|i| 0.5 * m.row(i).iter().map(|&x| (x as f64).powi(2)).sum::<f64>().log2())
        .sum();
    by_cols.min(by_rows)
}

/// Signed determinant via CRT over enough 31-bit primes.
pub(crate) fn multimodular_det(m: &IntMatrix) -> BigInt {
    // slack covers the sign bit and f64 rounding in the bound
    let needed = hadamard_bits(m).max(0.0) + 8.0;
    let mut residues = Vec::new();
    let mut have = 0.0;
    for p in PrimeIter::new() {
        residues.push((p, det_mod_prime(m, p)));
        have += (p as f64).log2();
        if have > needed {
            break;
        }
    }
    crt_symmetric(&residues)
}

/// `x mod p` for `p < 2^31`, `x < 2^63`, via a precomputed `floor(2^64 / p)`.
#[derive(Clone, Copy)]
struct Barrett {
    p: u64,
    mu: u64,
}

impl Barrett {
    fn new(p: u64) -> Self {
        Self { p, mu: (u128::from(u64::MAX) / u128::from(p)) as u64 }
    }

    #[inline(always)]
    fn reduce(self, x: u64) -> u64 {
        let q = ((u128::from(x) * u128::from(self.mu)) >> 64) as u64;
        let r = x - q * self.p;
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }
}

fn det_mod_prime(m: &IntMatrix, p: u64) -> u64 {
    let n = m.rows();
    let pi = p as i64;
    let br = Barrett::new(p);
    let mut a: Vec<u64> = m.as_slice().iter().map(|&x| x.rem_euclid(pi) as u64).collect();
    let mut det: u64 = 1;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
            return 0;
        };
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = (p - det) % p;
        }
        let d = a[col * n + col];
        det = det * d % p;
        let inv = pow_mod(d, p - 2, p);
        let (head, tail) = a.split_at_mut((col + 1) * n);
        let pivot_row = &head[col * n + col..(col + 1) * n];
        for r in 0..(n - col - 1) {
            let row = &mut tail[r * n + col..(r + 1) * n];
            let x = row[0];
            if x == 0 {
                continue;
            }
            let f = p - x * inv % p;
            for (v, &pv) in row.iter_mut().zip(pivot_row) {
                // f, pivot < 2^31 so the sum stays below 2^63
                *v = br.reduce(*v + f * pv);
            }
        }
    }
    det
}

fn crt_symmetric(residues: &[(u64, u64)]) -> BigInt {
    let mut x = BigUint::zero();
    let mut modulus = BigUint::one();
    for &(p, r) in residues {
        let x_mod_p = (&x % p).to_u64_digits().first().copied().unwrap_or(0);
        let m_mod_p = (&modulus % p).to_u64_digits().first().copied().unwrap_or(0);
        let diff = (r + p - x_mod_p) % p;
        let k = diff * pow_mod(m_mod_p, p - 2, p) % p;
        x += &modulus * k;
        modulus *= p;
    }
    let half = &modulus >> 1;
    if x > half {
        BigInt::from(x) - BigInt::from(modulus)
    } else {
        BigInt::from(x)
    }
}

struct PrimeIter(u64);

impl PrimeIter {
    fn new() -> Self {
        Self(1 << 31)
    }
}

impl Iterator for PrimeIter {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        loop {
            self.0 -= 1;
            if self.0 < (1 << 20) {
                return None;
            }
            if is_prime_u64(self.0) {
                return Some(self.0);
            }
        }
    }
}

/// True iff `T` is a basis of `L^perp_q(A) = { e : A e = 0 mod q }`.
///
/// Checks that `A T = 0 (mod q)` columnwise and that `|det T| = q^n` exactly,
/// which for full-row-rank `A` is the index of the lattice in `Z^m`.
pub fn is_basis_of_lambda_perp(a: &IntMatrix, t: &IntMatrix, q: Modulus) -> bool {
    let m = a.cols();
    if t.rows() != m || t.cols() != m {
        return false;
    }
    match a.annihilates_mod(t, q) {
        Ok(true) => {}
        _ => return false,
    }
    let expected = BigUint::from(q.value()).pow(a.rows() as u32);
    abs_determinant(t) == expected
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: u64) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn hand_examples_for_lambda_perp() {
        let a = IntMatrix::from_rows(&[[1, 0]]);
        let t = IntMatrix::from_rows(&[[5, 0], [0, 1]]);
        assert!(is_basis_of_lambda_perp(&a, &t, q(5)));
        let sub = IntMatrix::from_rows(&[[5, 0], [0, 5]]);
        assert!(!is_basis_of_lambda_perp(&a, &sub, q(5)));
        let wrong = IntMatrix::from_rows(&[[1, 0], [0, 1]]);
        assert!(!is_basis_of_lambda_perp(&a, &wrong, q(5)));
    }

    #[test]
    fn small_determinants() {
        let m = IntMatrix::from_rows(&[[2, 1], [0, 2]]);
        assert_eq!(abs_determinant(&m), BigUint::from(4u32));
        let m = IntMatrix::from_rows(&[[0, 1], [1, 0]]);
        assert_eq!(abs_determinant(&m), BigUint::from(1u32));
        let m = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
        assert_eq!(abs_determinant(&m), BigUint::zero());
        let m = IntMatrix::from_rows(&[[3, 1, 4], [1, 5, 9], [2, 6, 5]]);
        // 3(25-54) - 1(5-18) + 4(6-10) = -87 + 13 - 16
        assert_eq!(abs_determinant(&m), BigUint::from(90u32));
        assert_eq!(multimodular_det(&m), BigInt::from(-90));
    }

    #[test]
    fn zero_row_short_circuits() {
        let m = IntMatrix::from_rows(&[[1, 2, 3], [0, 0, 0], [4, 5, 6]]);
        assert_eq!(abs_determinant(&m), BigUint::zero());
    }

    #[test]
    fn large_entries_need_several_primes() {
        // diag(2^40, 3^20, -5^15) plus an off-diagonal entry
        let m = IntMatrix::from_rows(&[
            [1 << 40, 7, 0],
            [0, 3i64.pow(20), 0],
            [0, 0, -(5i64.pow(15))],
        ]);
        let want = BigUint::from(1u64 << 40) * BigUint::from(3u64.pow(20)) * BigUint::from(5u64.pow(15));
        assert_eq!(abs_determinant(&m), want);
        let dense = IntMatrix::from_rows(&[[1 << 40, 7], [3, 3i64.pow(20)]]);
        let want = BigInt::from(1i128 << 40) * BigInt::from(3i128.pow(20)) - BigInt::from(21);
        assert_eq!(multimodular_det(&dense), want);
    }
}
