//! The parameter system: derivation from a handful of inputs, validation of
//! every scheme constraint, presets, and the canonical text encoding.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::zq::{is_prime_u64, Modulus};

/// `M_1 = M_2 = M_3 = e^{1 + 1/288}`.
pub fn rejection_constant() -> f64 {
    (1.0f64 + 1.0 / 288.0).exp()
}

pub const MAX_DEPTH: u8 = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub n: usize,
    pub ell: u8,
    pub tau: u64,
    pub q: u64,
    pub m: usize,
    pub k: usize,
    pub kappa: usize,
    pub sigma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub gamma: u32,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub constraint: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "ERROR",
            Severity::Info => "INFO",
        };
        write!(f, "[{tag}] {}: lhs = {}, rhs = {}", self.constraint, self.lhs, self.rhs)
    }
}

/// Inputs to [`ParamSpec::build`]; `m` and `gamma` are derived when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub n: usize,
    pub ell: u8,
    pub q: u64,
    pub k: usize,
    pub kappa: usize,
    pub sigma: f64,
    pub m: Option<usize>,
    pub gamma: Option<u32>,
}

/// Smallest conforming `m`: `ceil(6 n log2 q)` rounded up to a multiple of
/// the gadget width `n ceil(log2 q)`.
pub fn min_block_width(n: usize, q: u64) -> usize {
    let floor = (6.0 * n as f64 * (q as f64).log2()).ceil() as usize;
    let w = n * bit_length(q - 1) as usize;
    floor.div_ceil(w) * w
}

fn bit_length(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// `log2( C(k, kappa) * 2^kappa )`, the min-entropy of `R_H`.
pub fn ball_entropy_bits(k: usize, kappa: usize) -> f64 {
    if kappa > k {
        return f64::NEG_INFINITY;
    }
    let log_binom: f64 = (0..kappa).map(|i| ((k - i) as f64 / (i + 1) as f64).log2()).sum();
    log_binom + kappa as f64
}

impl ParamSpec {
    /// Fills every derived field without checking the constraints; only
    /// inputs that make the formulas meaningless are rejected.
    pub fn derive_unchecked(&self) -> Result<Params> {
        if self.n == 0 || self.k == 0 || self.ell > MAX_DEPTH || self.q < 2 {
            return Err(Error::Param(format!(
                "need n >= 1, k >= 1, q >= 2 and ell <= {MAX_DEPTH} (n = {}, k = {}, q = {}, ell = {})",
                self.n, self.k, self.q, self.ell
            )));
        }
        let m = self.m.unwrap_or_else(|| min_block_width(self.n, self.q));
        let gamma = self
            .gamma
            .unwrap_or_else(|| ball_entropy_bits(self.k, self.kappa).floor().max(0.0) as u32);
        let mut p = Params {
            n: self.n,
            ell: self.ell,
            tau: 1u64 << self.ell,
            q: self.q,
            m,
            k: self.k,
            kappa: self.kappa,
            sigma: self.sigma,
            sigma1: 0.0,
            sigma2: 0.0,
            sigma3: 0.0,
            m1: rejection_constant(),
            m2: rejection_constant(),
            m3: rejection_constant(),
            gamma,
            beta: 0.0,
        };
        p.fill_chain();
        Ok(p)
    }

    /// Derives and validates; any ERROR-level violation is a [`Error::Param`].
    pub fn build(&self) -> Result<Params> {
        let p = self.derive_unchecked()?;
        p.check()?;
        Ok(p)
    }
}

/// `derive(n, ell, q, k, kappa, sigma)` with `m` and `gamma` derived.
pub fn derive(n: usize, ell: u8, q: u64, k: usize, kappa: usize, sigma: f64) -> Result<Params> {
    ParamSpec { n, ell, q, k, kappa, sigma, m: None, gamma: None }.build()
}

impl Params {
    fn fill_chain(&mut self) {
        let l = self.total_width() as f64;
        self.sigma1 = 12.0 * (self.kappa as f64).sqrt();
        self.sigma2 = 12.0 * self.sigma * self.sigma1 * (l * self.k as f64).sqrt();
        self.sigma3 = 12.0 * self.sigma2 * l.sqrt();
        self.beta = beta_branches(self).0.max(beta_branches(self).1);
    }

    /// Same parameters with `sigma` replaced and the dependent widths recomputed.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        let spec = ParamSpec {
            n: self.n,
            ell: self.ell,
            q: self.q,
            k: self.k,
            kappa: self.kappa,
            sigma,
            m: Some(self.m),
            gamma: Some(self.gamma),
        };
        spec.build()
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.q).expect("validated modulus")
    }

    /// `(1 + ell) m`, the column count of `F_t` and the length of `z'`.
    pub fn total_width(&self) -> usize {
        (1 + self.ell as usize) * self.m
    }

    /// Slack standing in for the `omega(sqrt(log n))` factors:
    /// `ceil(sqrt(log2((ell + 1) m))) + 2`.
    pub fn eta_slack(&self) -> f64 {
        eta_slack(self.ell, self.m)
    }

    /// `sigma_3 sqrt((1 + ell) m)`, the verification bound on `|z'|`.
    pub fn z_bound(&self) -> f64 {
        self.sigma3 * (self.total_width() as f64).sqrt()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, severity: Severity, constraint: &str, lhs: f64, rhs: f64| {
            if !ok {
                out.push(Violation { severity, constraint: constraint.to_string(), lhs, rhs });
            }
        };
        use Severity::{Error as E, Info as I};
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);

        let q_ok = self.q >= 3 && is_prime_u64(self.q);
        check(q_ok, E, "q is an odd prime", self.q as f64, 0.0);
        let log_q = (self.q as f64).log2();
        let n = self.n as f64;
        let l = self.total_width() as f64;

        check(self.ell <= MAX_DEPTH, E, "ell <= 30", self.ell as f64, MAX_DEPTH as f64);
        check(self.tau == 1u64 << self.ell.min(63), E, "tau == 2^ell", self.tau as f64, 2f64.powi(self.ell as i32));
        check(self.n >= 1, E, "n >= 1", n, 1.0);
        check(self.k >= 1 && self.kappa <= self.k, E, "1 <= kappa <= k", self.kappa as f64, self.k as f64);

        let thm1 = (6.0 * n * log_q).round();
        check(self.m as f64 >= thm1, E, "m >= 6 n log q (TrapGen)", self.m as f64, thm1);
        check(self.m as f64 >= 2.0 * n * log_q, E, "m >= 2 n log q", self.m as f64, 2.0 * n * log_q);
        let gadget = 2 * self.n * bit_length(self.q.max(2) - 1) as usize;
        check(self.m >= gadget, E, "m >= 2 n ceil(log2 q) (gadget trapdoor)", self.m as f64, gadget as f64);

        check(self.sigma >= 1.0, E, "sigma >= 1", self.sigma, 1.0);
        let d = self.sigma * l.sqrt();
        let floor = 64.0 + n * log_q / (2.0 * d + 1.0).log2();
        check(l > floor, E, "(1+ell) m > 64 + n log q / log(2d+1), d = sigma sqrt((1+ell) m)", l, floor);

        let s1 = 12.0 * (self.kappa as f64).sqrt();
        check(close(self.sigma1, s1), E, "sigma1 == 12 sqrt(kappa)", self.sigma1, s1);
        let s2 = 12.0 * self.sigma * self.sigma1 * (l * self.k as f64).sqrt();
        check(close(self.sigma2, s2), E, "sigma2 == 12 sigma sigma1 sqrt((1+ell) m k)", self.sigma2, s2);
        let s3 = 12.0 * self.sigma2 * l.sqrt();
        check(close(self.sigma3, s3), E, "sigma3 == 12 sigma2 sqrt((1+ell) m)", self.sigma3, s3);

        let mc = rejection_constant();
        for (name, v) in [("M1 == e^(1+1/288)", self.m1), ("M2 == e^(1+1/288)", self.m2), ("M3 == e^(1+1/288)", self.m3)] {
            check(close(v, mc), E, name, v, mc);
        }

        let ent = ball_entropy_bits(self.k, self.kappa);
        check(ent >= self.gamma as f64, E, "2^kappa C(k, kappa) >= 2^gamma", ent, self.gamma as f64);

        let (b1, b2) = beta_branches(self);
        check(close(self.beta, b1.max(b2)), E, "beta == max{(2 sigma3 + 2 sigma sqrt(kappa)), (2 sigma3 + sigma2)} sqrt((1+ell) m)", self.beta, b1.max(b2));

        let hard = self.beta * (n * n.log2().max(1.0)).sqrt();
        check(self.q as f64 >= hard, I, "q >= beta sqrt(n log n) (SIS hardness; not attainable at toy scale)", self.q as f64, hard);
        out
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            s.push_str(&k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    fn fields(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("beta".into(), self.beta.to_string());
        m.insert("ell".into(), self.ell.to_string());
        m.insert("gamma".into(), self.gamma.to_string());
        m.insert("k".into(), self.k.to_string());
        m.insert("kappa".into(), self.kappa.to_string());
        m.insert("m".into(), self.m.to_string());
        m.insert("m1".into(), self.m1.to_string());
        m.insert("m2".into(), self.m2.to_string());
        m.insert("m3".into(), self.m3.to_string());
        m.insert("n".into(), self.n.to_string());
        m.insert("q".into(), self.q.to_string());
        m.insert("sigma".into(), self.sigma.to_string());
        m.insert("sigma1".into(), self.sigma1.to_string());
        m.insert("sigma2".into(), self.sigma2.to_string());
        m.insert("sigma3".into(), self.sigma3.to_string());
        m.insert("tau".into(), self.tau.to_string());
        m
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("params line without '=': {line:?}")))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Format(format!("duplicate params key {k:?}")));
            }
        }
        fn take<T: std::str::FromStr>(kv: &mut BTreeMap<String, String>, key: &str) -> Result<T> {
            let v = kv.remove(key).ok_or_else(|| Error::Format(format!("params missing key {key:?}")))?;
            v.parse().map_err(|_| Error::Format(format!("params key {key:?} has bad value {v:?}")))
        }
        let p = Params {
            beta: take(&mut kv, "beta")?,
            ell: take(&mut kv, "ell")?,
            gamma: take(&mut kv, "gamma")?,
            k: take(&mut kv, "k")?,
            kappa: take(&mut kv, "kappa")?,
            m: take(&mut kv, "m")?,
            m1: take(&mut kv, "m1")?,
            m2: take(&mut kv, "m2")?,
            m3: take(&mut kv, "m3")?,
            n: take(&mut kv, "n")?,
            q: take(&mut kv, "q")?,
            sigma: take(&mut kv, "sigma")?,
            sigma1: take(&mut kv, "sigma1")?,
            sigma2: take(&mut kv, "sigma2")?,
            sigma3: take(&mut kv, "sigma3")?,
            tau: take(&mut kv, "tau")?,
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::Format(format!("unknown params key {k:?}")));
        }
        Ok(p)
    }

    /// Errors-only view of [`Params::validate`].
    pub fn check(&self) -> Result<()> {
        let errs: Vec<String> = self
            .validate()
            .into_iter()
            .filter(|v| v.severity == Severity::Error)
            .map(|v| v.to_string())
            .collect();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Param(errs.join("; ")))
        }
    }
}

pub fn eta_slack(ell: u8, m: usize) -> f64 {
    (((1 + ell as usize) * m) as f64).log2().sqrt().ceil() + 2.0
}

fn beta_branches(p: &Params) -> (f64, f64) {
    let root = (p.total_width() as f64).sqrt();
    (
        (2.0 * p.sigma3 + 2.0 * p.sigma * (p.kappa as f64).sqrt()) * root,
        (2.0 * p.sigma3 + p.sigma2) * root,
    )
}

pub const PRESET_NAMES: [&str; 3] = ["toy-tiny", "toy-T0", "toy-T1"];

/// Named parameter profiles. `sigma` here is a placeholder; key generation
/// replaces it with the value measured from the generated trapdoor.
pub fn preset_spec(name: &str) -> Option<ParamSpec> {
    Some(match name {
        "toy-tiny" => ParamSpec { n: 1, ell: 3, q: 17, k: 8, kappa: 2, sigma: 20.0, m: Some(25), gamma: Some(6) },
        "toy-T0" => ParamSpec { n: 2, ell: 2, q: 257, k: 16, kappa: 4, sigma: 25.0, m: Some(96), gamma: Some(14) },
        "toy-T1" => ParamSpec { n: 4, ell: 2, q: 12289, k: 32, kappa: 8, sigma: 40.0, m: None, gamma: Some(30) },
        _ => return None,
    })
}

pub fn preset(name: &str) -> Option<Params> {
    preset_spec(name).map(|s| s.build().expect("presets are valid"))
}
