use super::{IntMatrix, IntVector, Modulus};
use crate::error::{Error, Result};

/// Reduced row-echelon form of a full-row-rank matrix mod a prime.
///
/// Keeps the row transform `E` with `E*A = R`, so any syndrome can be solved
/// against the same reduction. Pivots are the leftmost nonzero column of each
/// row; free variables are set to zero.
#[derive(Debug, Clone)]
pub struct Echelon {
    q: Modulus,
    cols: usize,
    transform: IntMatrix,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(a: &IntMatrix, q: Modulus) -> Result<Self> {
        let (n, m) = a.shape();
        let mut r = a.reduce_mod(q);
        let mut e = IntMatrix::identity(n);
        let mut pivots = Vec::with_capacity(n);
        let mut row = 0;
        for col in 0..m {
            if row == n {
                break;
            }
            let Some(p) = (row..n).find(|&i| r[(i, col)] != 0) else {
                continue;
            };
            swap_rows(&mut r, row, p);
            swap_rows(&mut e, row, p);
            let inv = q.inv(r[(row, col)]).expect("nonzero pivot");
            scale_row(&mut r, row, inv, q);
            scale_row(&mut e, row, inv, q);
            for i in 0..n {
                if i != row && r[(i, col)] != 0 {
                    let f = r[(i, col)];
                    axpy_row(&mut r, i, row, f, q);
                    axpy_row(&mut e, i, row, f, q);
                }
            }
            pivots.push(col);
            row += 1;
        }
        if pivots.len() < n {
            return Err(Error::NoSolutionOrRankDeficient);
        }
        Ok(Self { q, cols: m, transform: e, pivots })
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// The canonical particular solution `t` in `[0, q)^m` with `A t = u`.
    pub fn solve(&self, u: &[i64]) -> Result<IntVector> {
        let y = self.transform.mul_vec_mod(u, self.q)?;
        let mut t = vec![0; self.cols];
        for (&p, &yi) in self.pivots.iter().zip(&y) {
            t[p] = yi;
        }
        Ok(t)
    }
}

/// Deterministic `t` with `A t = u (mod q)`, entries in `[0, q)`.
pub fn solve_particular(a: &IntMatrix, u: &[i64], q: Modulus) -> Result<IntVector> {
    Echelon::new(a, q)?.solve(u)
}

fn swap_rows(m: &mut IntMatrix, i: usize, j: usize) {
    if i != j {
        for c in 0..m.cols() {
            let t = m[(i, c)];
            m[(i, c)] = m[(j, c)];
            m[(j, c)] = t;
        }
    }
}

fn scale_row(m: &mut IntMatrix, i: usize, f: i64, q: Modulus) {
    for c in 0..m.cols() {
        m[(i, c)] = q.mul(m[(i, c)], f);
    }
}

// row_i -= f * row_j
fn axpy_row(m: &mut IntMatrix, i: usize, j: usize, f: i64, q: Modulus) {
    for c in 0..m.cols() {
        m[(i, c)] = q.sub(m[(i, c)], q.mul(f, m[(j, c)]));
    }
}
