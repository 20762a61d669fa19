use std::fmt;

use rand_core::RngCore;
use zeroize::Zeroize;

use super::Modulus;
use crate::error::{Error, Result};

/// Exact integer vector. Mod-q vectors use the canonical range `[0, q)`.
pub type IntVector = Vec<i64>;

/// Dense row-major matrix of exact signed integers.
///
/// Entries are `i64`; every product or sum that could exceed that range is
/// accumulated in `i128` and narrowed with a checked conversion, so overflow
/// surfaces as [`Error::Overflow`] instead of wrapping.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} ", self.rows, self.cols)?;
        if self.rows * self.cols <= 64 {
            f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
        } else {
            f.write_str("[..]")
        }
    }
}

impl Zeroize for IntMatrix {
    fn zeroize(&mut self) {
        self.data.zeroize();
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { rows: rows.len(), cols, data }
    }

    /// Single-column matrix.
    pub fn column_vector(v: &[i64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// Matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(columns: &[IntVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    /// Uniform matrix over `[0, q)`.
    pub fn uniform_mod(rows: usize, cols: usize, q: Modulus, rng: &mut impl RngCore) -> Self {
        Self::from_fn(rows, cols, |_, _| uniform_below(rng, q.value()) as i64)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> IntVector {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn columns(&self) -> Vec<IntVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn max_abs(&self) -> i64 {
        self.data.iter().map(|x| x.saturating_abs()).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn reduce_mod(&self, q: Modulus) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| q.reduce_i64(x)).collect() }
    }

    pub fn is_reduced(&self, q: Modulus) -> bool {
        let qv = q.value() as i64;
        self.data.iter().all(|&x| (0..qv).contains(&x))
    }

    pub fn scale(&self, c: i64) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|&x| x.checked_mul(c).ok_or(Error::Overflow("scale")))
            .collect::<Result<_>>()?;
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Columns `range` as a new matrix.
    pub fn column_block(&self, start: usize, width: usize) -> Result<Self> {
        if start + width > self.cols {
            return Err(Error::DimensionMismatch(format!(
                "column block {start}..{} of a {}-column matrix",
                start + width,
                self.cols
            )));
        }
        Ok(Self::from_fn(self.rows, width, |i, j| self[(i, start + j)]))
    }

    /// Columns `idx` in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// `self * other` over the integers.
    pub fn mul_exact(&self, other: &Self) -> Result<Self> {
        check_inner(self, other)?;
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            for j in 0..other.cols {
                let mut acc: i128 = 0;
                for (l, &a) in r.iter().enumerate() {
                    acc = acc
                        .checked_add(a as i128 * other.data[l * other.cols + j] as i128)
                        .ok_or(Error::Overflow("mul_exact"))?;
                }
                out.push(i64::try_from(acc).map_err(|_| Error::Overflow("mul_exact"))?);
            }
        }
        Ok(Self { rows: self.rows, cols: other.cols, data: out })
    }

    /// `self * v` over the integers.
    pub fn mul_vec(&self, v: &[i64]) -> Result<IntVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        (0..self.rows)
            .map(|i| {
                let acc = dot_i128(self.row(i), v);
                i64::try_from(acc).map_err(|_| Error::Overflow("mul_vec"))
            })
            .collect()
    }

    /// `self * v mod q`, canonical residues.
    pub fn mul_vec_mod(&self, v: &[i64], q: Modulus) -> Result<IntVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let qi = q.value() as i128;
        Ok((0..self.rows)
            .map(|i| {
                let mut acc: i128 = 0;
                for (&a, &b) in self.row(i).iter().zip(v) {
                    acc += (a as i128 % qi) * (b as i128 % qi);
                    if acc.unsigned_abs() > REDUCE_AT {
                        acc %= qi;
                    }
                }
                q.reduce(acc)
            })
            .collect())
    }

    /// True iff every column of `self * t` is zero mod q.
    pub fn annihilates_mod(&self, t: &Self, q: Modulus) -> Result<bool> {
        let prod = mat_mul_mod(self, t, q)?;
        Ok(prod.data.iter().all(|&x| x == 0))
    }

    /// Permutes rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.rows || !is_permutation(perm) {
            return Err(Error::DimensionMismatch(format!(
                "invalid row permutation of length {} for {} rows",
                perm.len(),
                self.rows
            )));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            data.extend_from_slice(self.row(p));
        }
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operands are pre-reduced below 2^62, so each product is below 2^124 and a
// running sum can absorb several before it nears i128::MAX.
const REDUCE_AT: u128 = 1 << 126;

fn check_inner(a: &IntMatrix, b: &IntMatrix) -> Result<()> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

/// `A * B mod q` with entries in `[0, q)`.
pub fn mat_mul_mod(a: &IntMatrix, b: &IntMatrix, q: Modulus) -> Result<IntMatrix> {
    check_inner(a, b)?;
    let qi = q.value() as i128;
    let ar: Vec<i128> = a.data.iter().map(|&x| x as i128 % qi).collect();
    // transpose B so the inner loop walks contiguous memory
    let bt: Vec<i128> = (0..b.cols)
        .flat_map(|j| (0..b.rows).map(move |l| (j, l)))
        .map(|(j, l)| b.data[l * b.cols + j] as i128 % qi)
        .collect();
    let mut out = Vec::with_capacity(a.rows * b.cols);
    for i in 0..a.rows {
        let r = &ar[i * a.cols..(i + 1) * a.cols];
        for j in 0..b.cols {
            let c = &bt[j * b.rows..(j + 1) * b.rows];
            let mut acc: i128 = 0;
            for (&x, &y) in r.iter().zip(c) {
                acc += x * y;
                if acc.unsigned_abs() > REDUCE_AT {
                    acc %= qi;
                }
            }
            out.push(q.reduce(acc));
        }
    }
    Ok(IntMatrix { rows: a.rows, cols: b.cols, data: out })
}

/// Horizontal concatenation `[M_1 | M_2 | ...]`.
pub fn concat_cols(blocks: &[&IntMatrix]) -> Result<IntMatrix> {
    let Some(first) = blocks.first() else {
        return Ok(IntMatrix::zeros(0, 0));
    };
    let rows = first.rows;
    if let Some(bad) = blocks.iter().find(|b| b.rows != rows) {
        return Err(Error::DimensionMismatch(format!(
            "concat_cols: {} rows vs {}",
            bad.rows, rows
        )));
    }
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for b in blocks {
            data.extend_from_slice(b.row(i));
        }
    }
    Ok(IntMatrix { rows, cols, data })
}

/// Exact inner product, accumulated in `i128`.
///
/// Panics on `i128` overflow; inputs are bounded by the Gaussian tail cut, far
/// below that.
pub fn dot_i128(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).fold(0i128, |acc, (&x, &y)| {
        acc.checked_add(x as i128 * y as i128).expect("i128 overflow in inner product")
    })
}

pub fn norm_sq(v: &[i64]) -> i128 {
    dot_i128(v, v)
}

pub fn add_vec(a: &[i64], b: &[i64]) -> Result<IntVector> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("vector add {} vs {}", a.len(), b.len())));
    }
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.checked_add(y).ok_or(Error::Overflow("add_vec")))
        .collect()
}

pub fn sub_vec(a: &[i64], b: &[i64]) -> Result<IntVector> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("vector sub {} vs {}", a.len(), b.len())));
    }
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.checked_sub(y).ok_or(Error::Overflow("sub_vec")))
        .collect()
}

pub fn add_vec_mod(a: &[i64], b: &[i64], q: Modulus) -> IntVector {
    a.iter().zip(b).map(|(&x, &y)| q.add(x, y)).collect()
}

pub fn sub_vec_mod(a: &[i64], b: &[i64], q: Modulus) -> IntVector {
    a.iter().zip(b).map(|(&x, &y)| q.sub(x, y)).collect()
}

fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return false;
        }
    }
    true
}

/// Uniform integer in `[0, bound)` by rejection.
pub fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: u64) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn identity_times_b_reduces_b() {
        let b = IntMatrix::from_rows(&[[9, -1], [14, 3]]);
        let r = mat_mul_mod(&IntMatrix::identity(2), &b, q(7)).unwrap();
        assert_eq!(r, IntMatrix::from_rows(&[[2, 6], [0, 3]]));
    }

    #[test]
    fn small_hand_product() {
        let a = IntMatrix::from_rows(&[[1, 2], [3, 4]]);
        let b = IntMatrix::from_rows(&[[1], [1]]);
        assert_eq!(mat_mul_mod(&a, &b, q(5)).unwrap(), IntMatrix::from_rows(&[[3], [2]]));
    }

    #[test]
    fn shape_errors() {
        let a = IntMatrix::zeros(2, 3);
        assert!(matches!(mat_mul_mod(&a, &a, q(5)), Err(Error::DimensionMismatch(_))));
        assert!(IntMatrix::new(2, 2, vec![1, 2, 3]).is_err());
        assert!(concat_cols(&[&IntMatrix::zeros(2, 1), &IntMatrix::zeros(3, 1)]).is_err());
        assert!(a.permute_rows(&[0, 0]).is_err());
    }

    #[test]
    fn concat_identity_blocks() {
        let i2 = IntMatrix::identity(2);
        let two = i2.scale(2).unwrap();
        let c = concat_cols(&[&i2, &two]).unwrap();
        assert_eq!(c, IntMatrix::from_rows(&[[1, 0, 2, 0], [0, 1, 0, 2]]));
    }

    #[test]
    fn identity_permutation_is_noop() {
        let m = IntMatrix::from_rows(&[[1, 2], [3, 4], [5, 6]]);
        assert_eq!(m.permute_rows(&[0, 1, 2]).unwrap(), m);
        assert_eq!(m.permute_rows(&[2, 0, 1]).unwrap().row(0), &[5, 6]);
    }

    #[test]
    fn exact_product_reports_overflow() {
        let a = IntMatrix::from_rows(&[[i64::MAX, i64::MAX]]);
        let b = IntMatrix::from_rows(&[[2], [2]]);
        assert_eq!(a.mul_exact(&b), Err(Error::Overflow("mul_exact")));
    }

    #[test]
    fn mod_product_with_huge_entries() {
        // entries near 2^62 exercise the periodic reduction
        let big = (1i64 << 62) - 57;
        let qq = q((1 << 61) - 1);
        let a = IntMatrix::from_fn(1, 40, |_, _| big);
        let b = IntMatrix::from_fn(40, 1, |_, _| -big);
        let expect = (0..40).fold(0i128, |acc, _| {
            (acc + (big as i128 % qq.value() as i128) * (-(big as i128) % qq.value() as i128))
                .rem_euclid(qq.value() as i128)
        });
        assert_eq!(mat_mul_mod(&a, &b, qq).unwrap()[(0, 0)] as i128, expect);
    }
}
