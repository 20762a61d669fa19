//! Statistical helpers and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Unnormalized `rho_s(x - c) = exp(-pi (x - c)^2 / s^2)`.
pub fn rho(x: f64, s: f64, c: f64) -> f64 {
    let d = x - c;
    (-std::f64::consts::PI * d * d / (s * s)).exp()
}

/// Exact pmf of `D_{Z, s, c}` on `[c - 14 s, c + 14 s]`.
pub fn integer_gaussian_pmf(s: f64, c: f64) -> BTreeMap<i64, f64> {
    let lo = (c - 14.0 * s).floor() as i64;
    let hi = (c + 14.0 * s).ceil() as i64;
    let mut pmf: BTreeMap<i64, f64> = (lo..=hi).map(|x| (x, rho(x as f64, s, c))).collect();
    let total: f64 = pmf.values().sum();
    pmf.values_mut().for_each(|p| *p /= total);
    pmf
}

pub fn histogram(samples: impl IntoIterator<Item = i64>) -> BTreeMap<i64, u64> {
    let mut h = BTreeMap::new();
    for x in samples {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

/// Pearson chi-squared p-value of `counts` against `pmf`. Adjacent cells are
/// pooled until each expects at least 5; mass outside the pmf support counts
/// as its own cell with a tiny expectation, which fails the test loudly.
pub fn chi_squared_p(counts: &BTreeMap<i64, u64>, pmf: &BTreeMap<i64, f64>) -> f64 {
    let n: u64 = counts.values().sum();
    let n = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (x, p) in pmf {
        obs += counts.get(x).copied().unwrap_or(0) as f64;
        exp += p * n;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += obs;
        last.1 += exp;
    }
    let outside: u64 = counts.iter().filter(|(x, _)| !pmf.contains_key(x)).map(|(_, c)| c).sum();
    if outside > 0 {
        return 0.0;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(df).expect("df > 0").cdf(stat)
}

/// Two-sample Kolmogorov-Smirnov: true when the samples are NOT distinguished
/// at level `alpha` (asymptotic critical value).
pub fn ks_same(a: &[i64], b: &[i64], alpha: f64) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    d <= c * ((na + nb) / (na * nb)).sqrt()
}

/// Every node of a depth-`ell` tree as a bit string, root first.
pub fn all_nodes(ell: u8) -> Vec<Vec<bool>> {
    let mut out = vec![Vec::new()];
    for len in 1..=ell as usize {
        for v in 0..(1u64 << len) {
            out.push((0..len).map(|i| (v >> (len - 1 - i)) & 1 == 1).collect());
        }
    }
    out
}

pub fn leaf_bits(t: u64, ell: u8) -> Vec<bool> {
    (0..ell as usize).map(|i| (t >> (ell as usize - 1 - i)) & 1 == 1).collect()
}

pub fn is_prefix(w: &[bool], leaf: &[bool]) -> bool {
    w.len() <= leaf.len() && leaf[..w.len()] == *w
}

/// Minimal cover by brute force: the nodes whose leaves are all `>= t` and
/// whose parent (if any) has a leaf `< t`. Sorted by (length, value).
pub fn cover_oracle(t: u64, ell: u8) -> Vec<Vec<bool>> {
    let tau = 1u64 << ell;
    let leaves: Vec<Vec<bool>> = (0..tau).map(|x| leaf_bits(x, ell)).collect();
    let all_future = |w: &[bool]| leaves.iter().enumerate().filter(|(_, l)| is_prefix(w, l)).all(|(x, _)| x as u64 >= t);
    let mut out: Vec<Vec<bool>> = all_nodes(ell)
        .into_iter()
        .filter(|w| all_future(w) && (w.is_empty() || !all_future(&w[..w.len() - 1])))
        .collect();
    out.sort_by_key(|w| (w.len(), w.iter().fold(0u64, |acc, &b| acc * 2 + b as u64)));
    out
}

pub fn bits_to_string(w: &[bool]) -> String {
    if w.is_empty() {
        "ε".into()
    } else {
        w.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}
