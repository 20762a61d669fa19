//! Trapdoor generation, basis extension and Gaussian preimage sampling.
//!
//! `trap_gen` uses the gadget construction: `A = [A_bar | G - A_bar R]` with a
//! uniform `A_bar`, a ternary `R` and the base-2 gadget `G = I_n (x) (1,2,..)`.
//! Since `A [[I, R], [0, I]] = [A_bar | G]`, the basis of `L^perp_q(A)` is the
//! image under that unimodular map of the obvious basis of `L^perp_q([A_bar|G])`.

use crate::error::{Error, Result};
use crate::gaussian::{GaussWidth, NearestPlaneSampler};
use crate::rng::RandomSource;
use crate::zq::{
    add_vec, is_basis_of_lambda_perp, norm_sq, uniform_below, Echelon, IntMatrix, IntVector, Modulus,
};

/// `(A, T)` with `T` a basis of `L^perp_q(A)` and its measured `|T~|`.
#[derive(Debug, Clone)]
pub struct TrapdoorPair {
    pub a: IntMatrix,
    pub t: IntMatrix,
    pub gs_norm: f64,
}

impl TrapdoorPair {
    /// Validates a loaded pair and recomputes `|T~|`.
    pub fn from_parts(a: IntMatrix, t: IntMatrix, q: Modulus) -> Result<Self> {
        if !is_basis_of_lambda_perp(&a, &t, q) {
            return Err(Error::InvalidTrapdoor("T is not a basis of the q-ary lattice of A".into()));
        }
        let gs_norm = crate::zq::gram_schmidt(&t)?.max_norm();
        Ok(Self { a, t, gs_norm })
    }
}

/// `{ e : |e| <= s sqrt(m) }`.
#[derive(Debug, Clone, Copy)]
pub struct Dom {
    pub s: GaussWidth,
    pub m_total: usize,
}

impl Dom {
    pub fn contains(&self, e: &[i64]) -> bool {
        let bound = self.s.get() * self.s.get() * self.m_total as f64;
        (norm_sq(e) as f64) <= bound
    }
}

/// Number of gadget columns, `n * ceil(log2 q)`.
pub fn gadget_width(n: usize, q: Modulus) -> usize {
    n * q.bits() as usize
}

/// Generates `A` (n x m, uniform-looking mod q) with a short basis of its
/// q-ary lattice.
pub fn trap_gen(n: usize, q: Modulus, m: usize, rng: &mut RandomSource) -> Result<TrapdoorPair> {
    let digits = q.bits() as usize;
    let w = n * digits;
    if n == 0 || m < 2 * w {
        return Err(Error::Param(format!(
            "trap_gen needs m >= 2 n ceil(log2 q) = {}, got m = {m}",
            2 * w
        )));
    }
    let mbar = m - w;
    let qv = q.value() as i64;
    let a_bar = IntMatrix::uniform_mod(n, mbar, q, rng);
    let r = IntMatrix::from_fn(mbar, w, |_, _| uniform_below(rng, 3) as i64 - 1);

    // A = [A_bar | G - A_bar R]
    let ar = a_bar.mul_exact(&r)?;
    let a = IntMatrix::from_fn(n, m, |i, j| {
        if j < mbar {
            a_bar[(i, j)]
        } else {
            let c = j - mbar;
            let g = if c / digits == i { 1i64 << (c % digits) } else { 0 };
            q.reduce_i64(g - ar[(i, c)])
        }
    });

    // S_G: block diagonal, each block spans L^perp_q(1, 2, ..., 2^{k-1})
    let mut s_g = IntMatrix::zeros(w, w);
    for blk in 0..n {
        let o = blk * digits;
        for j in 0..digits - 1 {
            s_g[(o + j, o + j)] = 2;
            s_g[(o + j + 1, o + j)] = -1;
        }
        for b in 0..digits {
            s_g[(o + b, o + digits - 1)] = (qv >> b) & 1;
        }
    }
    // W: G W = -A_bar (mod q), column j = binary digits of -A_bar[:, j]
    let mut wmat = IntMatrix::zeros(w, mbar);
    for j in 0..mbar {
        for i in 0..n {
            let v = q.reduce_i64(-a_bar[(i, j)]);
            for b in 0..digits {
                wmat[(i * digits + b, j)] = (v >> b) & 1;
            }
        }
    }
    let rw = r.mul_exact(&wmat)?;
    let rs = r.mul_exact(&s_g)?;

    // T = [[R S_G, I + R W], [S_G, W]]; the S_G-derived columns come first,
    // which keeps the later Gram-Schmidt norms at most one.
    let t = IntMatrix::from_fn(m, m, |i, j| {
        if j < w {
            if i < mbar {
                rs[(i, j)]
            } else {
                s_g[(i - mbar, j)]
            }
        } else {
            let c = j - w;
            if i < mbar {
                rw[(i, c)] + i64::from(i == c)
            } else {
                wmat[(i - mbar, c)]
            }
        }
    });
    if !is_basis_of_lambda_perp(&a, &t, q) {
        return Err(Error::Internal("gadget trapdoor failed its own basis check".into()));
    }
    let gs_norm = crate::zq::gram_schmidt(&t)?.max_norm();
    Ok(TrapdoorPair { a, t, gs_norm })
}

/// Extends a basis `T2` of `L^perp_q(A2)` to a basis of `L^perp_q(A)` where
/// `A2` is the column block `span = (offset, width)` of `A`.
///
/// The result has the columns of `T2` first and `|T~| = |T2~|`. Only the cheap
/// preconditions (`A2 T2 = 0 mod q`, shapes) are checked here.
pub fn ext_basis(a_full: &IntMatrix, span: (usize, usize), t2: &IntMatrix, q: Modulus) -> Result<IntMatrix> {
    let (offset, width) = span;
    let total = a_full.cols();
    if offset + width > total || t2.rows() != width || t2.cols() != width {
        return Err(Error::InvalidTrapdoor(format!(
            "{}x{} basis for block {offset}+{width} of a {total}-column matrix",
            t2.rows(),
            t2.cols()
        )));
    }
    let a2 = a_full.column_block(offset, width)?;
    if !a2.annihilates_mod(t2, q)? {
        return Err(Error::InvalidTrapdoor("A2 T2 is not zero mod q".into()));
    }
    if width == total {
        return Ok(t2.clone());
    }
    let others: Vec<usize> = (0..offset).chain(offset + width..total).collect();
    let solver = Echelon::new(&a2, q)?;
    let mut t = IntMatrix::zeros(total, total);
    for i in 0..width {
        for j in 0..width {
            t[(offset + i, j)] = t2[(i, j)];
        }
    }
    for (o, &p) in others.iter().enumerate() {
        let neg: IntVector = a_full.column(p).iter().map(|&x| q.reduce_i64(-x)).collect();
        let wcol = solver.solve(&neg)?;
        let col = width + o;
        for (i, &x) in wcol.iter().enumerate() {
            t[(offset + i, col)] = q.center(x);
        }
        t[(p, col)] = 1;
    }
    Ok(t)
}

/// Preimage sampler bound to one `(A, T_A)`; Gram-Schmidt and the echelon
/// form are computed once.
#[derive(Debug, Clone)]
pub struct PreimageSampler {
    a: IntMatrix,
    q: Modulus,
    echelon: Echelon,
    sampler: NearestPlaneSampler,
}

const MAX_DOM_RETRIES: usize = 1000;

impl PreimageSampler {
    pub fn new(a: IntMatrix, t: IntMatrix, q: Modulus) -> Result<Self> {
        if t.rows() != a.cols() || !t.is_square() {
            return Err(Error::InvalidTrapdoor(format!(
                "{}x{} basis for a {}-column matrix",
                t.rows(),
                t.cols(),
                a.cols()
            )));
        }
        let echelon = Echelon::new(&a, q)?;
        let sampler = NearestPlaneSampler::new(t)?;
        Ok(Self { a, q, echelon, sampler })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn gs_norm(&self) -> f64 {
        self.sampler.gs_norm()
    }

    /// `e` with `A e = u (mod q)` distributed close to `D_{L^u_q(A), s}`.
    pub fn sample_isis(&self, s: GaussWidth, u: &[i64], rng: &mut RandomSource) -> Result<IntVector> {
        let t = self.echelon.solve(u)?;
        let center: Vec<f64> = t.iter().map(|&x| -(x as f64)).collect();
        let w = self.sampler.sample(s, &center, rng)?;
        add_vec(&t, &w)
    }

    /// `S` with `A S = K (mod q)`, every column in `Dom(s)`.
    pub fn sample_key(&self, s: GaussWidth, k: &IntMatrix, rng: &mut RandomSource) -> Result<IntMatrix> {
        if k.rows() != self.a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "K has {} rows, A has {}",
                k.rows(),
                self.a.rows()
            )));
        }
        let dom = Dom { s, m_total: self.a.cols() };
        let mut cols = Vec::with_capacity(k.cols());
        for j in 0..k.cols() {
            let u = k.column(j);
            let e = (0..MAX_DOM_RETRIES)
                .map(|_| self.sample_isis(s, &u, rng))
                .find(|e| e.as_ref().map_or(true, |e| dom.contains(e)))
                .ok_or_else(|| Error::Internal("sample_key: column never landed in Dom".into()))??;
            cols.push(e);
        }
        IntMatrix::from_columns(&cols)
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }
}

pub fn sample_isis(
    a: &IntMatrix,
    t: &IntMatrix,
    s: GaussWidth,
    u: &[i64],
    q: Modulus,
    rng: &mut RandomSource,
) -> Result<IntVector> {
    PreimageSampler::new(a.clone(), t.clone(), q)?.sample_isis(s, u, rng)
}

pub fn sample_key(
    a: &IntMatrix,
    t: &IntMatrix,
    s: GaussWidth,
    k: &IntMatrix,
    q: Modulus,
    rng: &mut RandomSource,
) -> Result<IntMatrix> {
    PreimageSampler::new(a.clone(), t.clone(), q)?.sample_key(s, k, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zq::{concat_cols, gram_schmidt, mat_mul_mod};

    fn q(v: u64) -> Modulus {
        Modulus::new(v).unwrap()
    }

    fn rng(b: u8) -> RandomSource {
        RandomSource::from_seed([b; 32])
    }

    #[test]
    fn small_trapdoor_is_valid() {
        let pair = trap_gen(2, q(257), 96, &mut rng(1)).unwrap();
        assert_eq!(pair.a.shape(), (2, 96));
        assert!(pair.a.is_reduced(q(257)));
        assert!(is_basis_of_lambda_perp(&pair.a, &pair.t, q(257)));
        assert_eq!(crate::zq::abs_determinant(&pair.t), num_bigint::BigUint::from(66049u32));
        assert!(pair.gs_norm >= 1.0);
    }

    #[test]
    fn too_narrow_is_a_param_error() {
        assert!(matches!(trap_gen(2, q(257), 30, &mut rng(1)), Err(Error::Param(_))));
    }

    #[test]
    fn ext_basis_full_span_is_identity_map() {
        let pair = trap_gen(1, q(17), 20, &mut rng(2)).unwrap();
        let t = ext_basis(&pair.a, (0, 20), &pair.t, q(17)).unwrap();
        assert_eq!(t, pair.t);
    }

    #[test]
    fn ext_basis_middle_block() {
        let qq = q(257);
        let mut r = rng(3);
        let pair = trap_gen(2, qq, 96, &mut r).unwrap();
        let b = IntMatrix::uniform_mod(2, 40, qq, &mut r);
        let c = IntMatrix::uniform_mod(2, 25, qq, &mut r);
        let full = concat_cols(&[&b, &pair.a, &c]).unwrap();
        let t = ext_basis(&full, (40, 96), &pair.t, qq).unwrap();
        assert!(is_basis_of_lambda_perp(&full, &t, qq));
        let g = gram_schmidt(&t).unwrap().max_norm();
        assert!((g - pair.gs_norm).abs() <= 1e-9 * pair.gs_norm);
    }

    #[test]
    fn ext_basis_rejects_bad_trapdoor() {
        let qq = q(17);
        let pair = trap_gen(1, qq, 20, &mut rng(4)).unwrap();
        let mut bad = pair.t.clone();
        bad[(0, 0)] += 1;
        assert!(matches!(ext_basis(&pair.a, (0, 20), &bad, qq), Err(Error::InvalidTrapdoor(_))));
        assert!(ext_basis(&pair.a, (5, 20), &pair.t, qq).is_err());
    }

    #[test]
    fn preimages_satisfy_their_syndromes() {
        let qq = q(257);
        let mut r = rng(5);
        let pair = trap_gen(2, qq, 96, &mut r).unwrap();
        let s = GaussWidth::new(pair.gs_norm * 6.0).unwrap();
        let ps = PreimageSampler::new(pair.a.clone(), pair.t.clone(), qq).unwrap();
        for _ in 0..20 {
            let u = IntMatrix::uniform_mod(2, 1, qq, &mut r).column(0);
            let e = ps.sample_isis(s, &u, &mut r).unwrap();
            assert_eq!(pair.a.mul_vec_mod(&e, qq).unwrap(), u);
        }
        let zero = ps.sample_isis(s, &[0, 0], &mut r).unwrap();
        assert_eq!(pair.a.mul_vec_mod(&zero, qq).unwrap(), vec![0, 0]);
        let k = IntMatrix::uniform_mod(2, 5, qq, &mut r);
        let sk = ps.sample_key(s, &k, &mut r).unwrap();
        assert_eq!(mat_mul_mod(&pair.a, &sk, qq).unwrap(), k);
        let dom = Dom { s, m_total: 96 };
        assert!(sk.columns().iter().all(|c| dom.contains(c)));
    }

    #[test]
    fn width_below_gs_norm_is_rejected() {
        let qq = q(257);
        let pair = trap_gen(2, qq, 96, &mut rng(6)).unwrap();
        let s = GaussWidth::new((pair.gs_norm * 0.5).max(1.0)).unwrap();
        let err = sample_isis(&pair.a, &pair.t, s, &[1, 2], qq, &mut rng(6)).unwrap_err();
        assert!(matches!(err, Error::WidthTooSmall { .. }));
    }
}
