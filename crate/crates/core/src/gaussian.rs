//! Discrete Gaussian sampling over `Z`, `Z^m` and lattice cosets, plus the
//! rejection-sampling acceptance rule used by every signing phase.
//!
//! The Gaussian parameter `s` follows the `rho_s(x) = exp(-pi |x|^2 / s^2)`
//! convention, so the standard deviation is `s / sqrt(2 pi)`.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::zq::{dot_f64, dot_i128, gram_schmidt, GramSchmidt, IntMatrix, IntVector};

/// Samples are never further than `TAIL_CUT * s` from the center.
pub const TAIL_CUT: f64 = 12.0;

/// Below this width `sample_z` inverts the exact CDF over the truncated support.
pub const TABLE_THRESHOLD: f64 = 16.0;

/// Gaussian parameter `s >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GaussWidth(f64);

impl GaussWidth {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 1.0 {
            return Err(Error::InvalidWidth(s));
        }
        Ok(Self(s))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// One draw from `D_{Z,s,c}`, tail-cut at `12 s`.
pub fn sample_z(s: GaussWidth, c: f64, rng: &mut RandomSource) -> i64 {
    sample_z_raw(s.0, c, rng)
}

fn sample_z_raw(s: f64, c: f64, rng: &mut RandomSource) -> i64 {
    if s < TABLE_THRESHOLD {
        sample_z_table(s, c, rng)
    } else {
        sample_z_rounded(s, c, rng)
    }
}

/// Exact inverse CDF over `[c - 12s, c + 12s]`.
fn sample_z_table(s: f64, c: f64, rng: &mut RandomSource) -> i64 {
    let lo = (c - TAIL_CUT * s).ceil() as i64;
    let hi = (c + TAIL_CUT * s).floor() as i64;
    let k = PI / (s * s);
    let weights: Vec<f64> = (lo..=hi)
        .map(|x| {
            let d = x as f64 - c;
            (-k * d * d).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.uniform_f64() * total;
    for (x, w) in (lo..=hi).zip(&weights) {
        if u < *w {
            return x;
        }
        u -= w;
    }
    hi
}

/// Rounded continuous Gaussian with an exact rejection correction.
///
/// Proposes `y ~ N(c, s'^2 / 2pi)` with `s' = s sqrt(1 + delta)` and accepts
/// `x = round(y)` with probability `rho_s(x - c) / (M rho_{s'}(y - c))`. The
/// widened proposal keeps that ratio bounded by
/// `M = exp(pi (1 + delta) / (4 s^2 delta))` for every `y`, so the accepted
/// `x` is distributed exactly as `D_{Z,s,c}` up to floating-point rounding.
fn sample_z_rounded(s: f64, c: f64, rng: &mut RandomSource) -> i64 {
    let delta = (PI / 2.0).sqrt() / s;
    let s_wide = s * (1.0 + delta).sqrt();
    let sd = s_wide / (2.0 * PI).sqrt();
    let log_m = PI * (1.0 + delta) / (4.0 * s * s * delta);
    loop {
        let g: f64 = StandardNormal.sample(rng);
        let y = g * sd;
        let x = (c + y).round();
        let big_x = x - c;
        if big_x.abs() > TAIL_CUT * s {
            continue;
        }
        let d = big_x - y;
        // pi [ y^2 / s'^2 - X^2 / s^2 ] without cancellation
        let expo = PI * (-(y * y) * delta / (s * s * (1.0 + delta)) - (2.0 * y * d + d * d) / (s * s));
        if rng.uniform_f64() < (expo - log_m).exp() {
            return x as i64;
        }
    }
}

/// `m` independent draws from `D_{Z,s}`.
pub fn sample_zm(s: GaussWidth, m: usize, rng: &mut RandomSource) -> IntVector {
    (0..m).map(|_| sample_z(s, 0.0, rng)).collect()
}

/// `min(1, D_s(z) / (M * D_{s,v}(z)))`, i.e.
/// `min(1, exp(pi (|v|^2 - 2 <z,v>) / s^2) / M)`.
///
/// The bracket is an exact integer; only the final scaling is floating point.
pub fn accept_ratio(z: &[i64], v: &[i64], s: GaussWidth, m: f64) -> f64 {
    assert_eq!(z.len(), v.len(), "accept_ratio on vectors of different length");
    let num = dot_i128(v, v) - 2 * dot_i128(z, v);
    let r = (PI * num as f64 / (s.0 * s.0)).exp() / m;
    r.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// Bernoulli trial with success probability `accept_ratio(z, v, s, m)`.
pub fn rejection_step(z: &[i64], v: &[i64], s: GaussWidth, m: f64, rng: &mut RandomSource) -> Decision {
    let p = accept_ratio(z, v, s, m);
    if rng.uniform_f64() < p {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// Randomized nearest-plane sampler for `D_{L(T),s,c}` with the
/// Gram-Schmidt data of `T` computed once.
#[derive(Debug, Clone)]
pub struct NearestPlaneSampler {
    basis: IntMatrix,
    columns: Vec<IntVector>,
    gso: GramSchmidt,
    inv_norm_sq: Vec<f64>,
}

impl NearestPlaneSampler {
    pub fn new(basis: IntMatrix) -> Result<Self> {
        let gso = gram_schmidt(&basis)?;
        let inv_norm_sq = gso.norms.iter().map(|n| 1.0 / (n * n)).collect();
        let columns = basis.columns();
        Ok(Self { basis, columns, gso, inv_norm_sq })
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn gso(&self) -> &GramSchmidt {
        &self.gso
    }

    /// `|T~|`.
    pub fn gs_norm(&self) -> f64 {
        self.gso.max_norm()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Lattice vector close in distribution to `D_{L(T),s,c}`.
    pub fn sample(&self, s: GaussWidth, center: &[f64], rng: &mut RandomSource) -> Result<IntVector> {
        let m = self.dim();
        if center.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "center of length {} for a {m}-dimensional lattice",
                center.len()
            )));
        }
        let gs = self.gs_norm();
        if s.0 < gs {
            return Err(Error::WidthTooSmall { width: s.0, required: gs });
        }
        let mut c = center.to_vec();
        let mut coeffs = vec![0i64; m];
        for i in (0..m).rev() {
            let ci = dot_f64(&c, &self.gso.vectors[i]) * self.inv_norm_sq[i];
            let si = s.0 / self.gso.norms[i];
            let zi = sample_z_raw(si, ci, rng);
            coeffs[i] = zi;
            if zi != 0 {
                let zf = zi as f64;
                for (cj, &tj) in c.iter_mut().zip(&self.columns[i]) {
                    *cj -= zf * tj as f64;
                }
            }
        }
        self.basis.mul_vec(&coeffs)
    }
}

/// One-shot `SampleD(T, s, c)`; prefer [`NearestPlaneSampler`] for repeated draws.
pub fn sample_d(t: &IntMatrix, s: GaussWidth, c: &[f64], rng: &mut RandomSource) -> Result<IntVector> {
    NearestPlaneSampler::new(t.clone())?.sample(s, c, rng)
}
