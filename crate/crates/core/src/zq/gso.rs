use super::IntMatrix;
use crate::error::{Error, Result};

/// Gram-Schmidt orthogonalization of a basis, columns taken in order.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    /// `vectors[i]` is the orthogonalized column `b~_i` (un-normalized).
    pub vectors: Vec<Vec<f64>>,
    /// `norms[i] = |b~_i|`.
    pub norms: Vec<f64>,
    /// Row-major `m x m` coefficients with `b_j = sum_i mu[i][j] b~_i`;
    /// unit upper triangular.
    pub mu: Vec<f64>,
}

impl GramSchmidt {
    /// `|B~| = max_i |b~_i|`.
    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }

    pub fn dim(&self) -> usize {
        self.norms.len()
    }

    #[inline]
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.mu[i * self.dim() + j]
    }
}

const DEGENERACY: f64 = 1e-9;

/// Gram-Schmidt of the columns of a square integer basis in `f64`.
///
/// Uses the modified (re-projecting) variant, which produces the same vectors
/// as the textbook recurrence with better rounding behaviour.
pub fn gram_schmidt(b: &IntMatrix) -> Result<GramSchmidt> {
    if !b.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Gram-Schmidt needs a square basis, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let m = b.rows();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut norms_sq: Vec<f64> = Vec::with_capacity(m);
    let mut mu = vec![0.0; m * m];
    for j in 0..m {
        let col: Vec<f64> = (0..m).map(|i| b[(i, j)] as f64).collect();
        let orig_sq: f64 = col.iter().map(|x| x * x).sum();
        let mut v = col;
        for (i, bi) in vectors.iter().enumerate() {
            let c = dot(&v, bi) / norms_sq[i];
            mu[i * m + j] = c;
            if c != 0.0 {
                for (x, y) in v.iter_mut().zip(bi) {
                    *x -= c * y;
                }
            }
        }
        mu[j * m + j] = 1.0;
        let nsq = dot(&v, &v);
        if !(nsq.sqrt() >= DEGENERACY * orig_sq.sqrt()) || orig_sq == 0.0 {
            return Err(Error::DegenerateBasis(j));
        }
        norms_sq.push(nsq);
        vectors.push(v);
    }
    let norms = norms_sq.iter().map(|x| x.sqrt()).collect();
    Ok(GramSchmidt { vectors, norms, mu })
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
