//! Signer and user state machines for the five signing phases.
//!
//! ```text
//! signer                         user
//! P1  r <- D_s2, x = F_t r   --x-->
//!                                 P2  a, b, d' ; u = F_t a + x + K b
//!                                     c = com(mu, d'), e' = H(u, c), e = e' + b
//!                            <--e--   (local rejection on e)
//! P3  z = r + S_t e          --z-->   (or a fresh x on rejection)
//!                                 P4  z' = z + a, rejection + norm check
//!                            <-res--  accept, or (a, b, e', c)
//! P5  check restart payload, restart from P1 or output the view
//! ```

use std::sync::Arc;

use serde::Serialize;
use zeroize::Zeroize;

use super::{PublicKey, Signature};
use crate::error::{Error, Result};
use crate::gaussian::{accept_ratio, rejection_step, sample_zm, Decision, GaussWidth};
use crate::hash::{challenge_hash, commit, commitment_bits, in_challenge_ball, ternary_to_ints, BitString};
use crate::rng::RandomSource;
use crate::timetree::SecretKey;
use crate::trapdoor::PreimageSampler;
use crate::zq::{add_vec, add_vec_mod, norm_sq, sub_vec, sub_vec_mod, IntMatrix, IntVector};

/// Returns to Phase 1 allowed per session before giving up.
pub const MAX_RESTARTS: u32 = 64;

/// Bound on the user's local Phase-2 loop.
pub const PHASE2_MAX_ITERATIONS: u32 = 10_000;

fn width(s: f64) -> GaussWidth {
    GaussWidth::new(s).expect("validated parameters have widths >= 1")
}

/// Acceptance counters for one or more signing runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SignStats {
    pub restarts: u32,
    pub phase2_attempts: u64,
    pub phase2_accepts: u64,
    pub phase3_attempts: u64,
    pub phase3_accepts: u64,
    pub phase4_attempts: u64,
    pub phase4_accepts: u64,
}

impl SignStats {
    pub fn merge(&mut self, o: &SignStats) {
        self.restarts += o.restarts;
        self.phase2_attempts += o.phase2_attempts;
        self.phase2_accepts += o.phase2_accepts;
        self.phase3_attempts += o.phase3_attempts;
        self.phase3_accepts += o.phase3_accepts;
        self.phase4_attempts += o.phase4_attempts;
        self.phase4_accepts += o.phase4_accepts;
    }
}

/// The signer's record of a completed session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct View {
    pub t: u64,
    pub r: IntVector,
    pub e: IntVector,
    pub z: IntVector,
}

/// The user's restart request `(a, b, e', c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartPayload {
    pub a: IntVector,
    pub b: IntVector,
    pub e_prime: Vec<i8>,
    pub c: BitString,
}

/// Per-period signing context: `F_t` and a preimage sampler for its
/// delegated trapdoor.
#[derive(Debug)]
pub struct PeriodSigner {
    pk: Arc<PublicKey>,
    t: u64,
    f_t: IntMatrix,
    sampler: PreimageSampler,
}

impl PeriodSigner {
    pub fn new(pk: Arc<PublicKey>, sk: &SecretKey, t: u64) -> Result<Self> {
        let q = pk.params.modulus();
        let leaf = sk.leaf_key(&pk.tree, q, t)?;
        let f_t = pk.period_matrix(t)?;
        let sampler = PreimageSampler::new(f_t.clone(), leaf.basis().clone(), q)?;
        Ok(Self { pk, t, f_t, sampler })
    }

    pub fn public_key(&self) -> &Arc<PublicKey> {
        &self.pk
    }

    pub fn period(&self) -> u64 {
        self.t
    }

    pub fn period_matrix(&self) -> &IntMatrix {
        &self.f_t
    }

    /// Phase 1: samples `S_t` with `F_t S_t = K` and the first `(r, x)`.
    pub fn start(self: &Arc<Self>, mut rng: RandomSource) -> Result<(SignerSession, IntVector)> {
        let p = &self.pk.params;
        let s_t = self.sampler.sample_key(width(p.sigma), &self.pk.k, &mut rng)?;
        let mut s = SignerSession {
            signer: Arc::clone(self),
            rng,
            phase: SignerPhase::AwaitE,
            s_t,
            r: Vec::new(),
            x: Vec::new(),
            e: Vec::new(),
            z: Vec::new(),
            stats: SignStats::default(),
        };
        s.commit_round()?;
        let x = s.x.clone();
        Ok((s, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignerPhase {
    AwaitE,
    AwaitResult,
    Done,
    Aborted,
}

pub enum Phase3Out {
    Z(IntVector),
    /// Phase-3 rejection: the session is back in Phase 1 with this fresh `x`.
    RestartX(IntVector),
}

pub enum Phase5Out {
    Done(View),
    RestartX(IntVector),
}

/// What the user answers after Phase 4, as seen by the signer.
#[derive(Debug, Clone, PartialEq)]
pub enum UserResult {
    Accept,
    Restart(RestartPayload),
}

pub struct SignerSession {
    signer: Arc<PeriodSigner>,
    rng: RandomSource,
    phase: SignerPhase,
    s_t: IntMatrix,
    r: IntVector,
    x: IntVector,
    e: IntVector,
    z: IntVector,
    stats: SignStats,
}

impl Drop for SignerSession {
    fn drop(&mut self) {
        self.s_t.zeroize();
        self.r.zeroize();
    }
}

impl SignerSession {
    fn commit_round(&mut self) -> Result<()> {
        let p = &self.signer.pk.params;
        self.r = sample_zm(width(p.sigma2), p.total_width(), &mut self.rng);
        self.x = self.signer.f_t.mul_vec_mod(&self.r, p.modulus())?;
        self.phase = SignerPhase::AwaitE;
        Ok(())
    }

    fn restart(&mut self) -> Result<IntVector> {
        self.stats.restarts += 1;
        if self.stats.restarts > MAX_RESTARTS {
            self.phase = SignerPhase::Aborted;
            return Err(Error::RestartLimitExceeded(MAX_RESTARTS));
        }
        self.commit_round()?;
        Ok(self.x.clone())
    }

    fn expect_phase(&self, want: SignerPhase, step: &str) -> Result<()> {
        if self.phase != want {
            return Err(Error::ProtocolViolation(format!("{step} in signer phase {:?}", self.phase)));
        }
        Ok(())
    }

    pub fn phase(&self) -> SignerPhase {
        self.phase
    }

    pub fn stats(&self) -> SignStats {
        self.stats
    }

    pub fn period(&self) -> u64 {
        self.signer.t
    }

    /// Current commitment `x = F_t r`.
    pub fn x(&self) -> &[i64] {
        &self.x
    }

    pub fn ephemeral_key(&self) -> &IntMatrix {
        &self.s_t
    }

    /// Phase 3: `z = r + S_t e`, kept with probability
    /// `min(1, D_s2(z) / (M2 D_{s2, S_t e}(z)))`.
    pub fn phase3(&mut self, e: &[i64]) -> Result<Phase3Out> {
        self.expect_phase(SignerPhase::AwaitE, "challenge received")?;
        let p = &self.signer.pk.params;
        let limit = 12.0 * p.sigma1;
        if e.len() != p.k || norm_sq(e) as f64 > limit * limit * p.k as f64 {
            self.phase = SignerPhase::Aborted;
            return Err(Error::ProtocolViolation(format!("challenge of length {} outside the plausible range", e.len())));
        }
        let se = self.s_t.mul_vec(e)?;
        let z = add_vec(&self.r, &se)?;
        self.stats.phase3_attempts += 1;
        let (s2, m2) = (p.sigma2, p.m2);
        if rejection_step(&z, &se, width(s2), m2, &mut self.rng) == Decision::Accept {
            self.stats.phase3_accepts += 1;
            self.e = e.to_vec();
            self.z = z.clone();
            self.phase = SignerPhase::AwaitResult;
            Ok(Phase3Out::Z(z))
        } else {
            Ok(Phase3Out::RestartX(self.restart()?))
        }
    }

    /// Phase 5: on accept returns the view; on a restart request checks the
    /// payload and restarts from Phase 1, or aborts if any check fails.
    pub fn phase5(&mut self, result: &UserResult) -> Result<Phase5Out> {
        self.expect_phase(SignerPhase::AwaitResult, "result received")?;
        match result {
            UserResult::Accept => {
                self.phase = SignerPhase::Done;
                Ok(Phase5Out::Done(View {
                    t: self.signer.t,
                    r: self.r.clone(),
                    e: self.e.clone(),
                    z: self.z.clone(),
                }))
            }
            UserResult::Restart(payload) => {
                if let Err(reason) = self.check_restart(payload) {
                    self.phase = SignerPhase::Aborted;
                    return Err(Error::AdversaryDetected(reason));
                }
                Ok(Phase5Out::RestartX(self.restart()?))
            }
        }
    }

    /// The three restart checks:
    /// (i) `e - b = e' = H(F_t a + x + K b, c)`,
    /// (ii) `e' = H(F_t a + F_t z - K e', c)`,
    /// (iii) the user could legitimately have rejected `z' = z + a`.
    pub fn check_restart(&self, p: &RestartPayload) -> Result<(), String> {
        let pk = &self.signer.pk;
        let params = &pk.params;
        let q = params.modulus();
        let l = params.total_width();
        if p.a.len() != l || p.b.len() != params.k || p.c.len() != commitment_bits(params.n) {
            return Err("restart payload has wrong shape".into());
        }
        let e_prime = ternary_to_ints(&p.e_prime);
        if !in_challenge_ball(&e_prime, params.k, params.kappa) {
            return Err("e' is not in the challenge set".into());
        }
        let diff = sub_vec(&self.e, &p.b).map_err(|e| e.to_string())?;
        if diff != e_prime {
            return Err("check (i): e - b differs from e'".into());
        }
        let f = &self.signer.f_t;
        let fa = f.mul_vec_mod(&p.a, q).map_err(|e| e.to_string())?;
        let kb = pk.k.mul_vec_mod(&p.b, q).map_err(|e| e.to_string())?;
        let u1 = add_vec_mod(&add_vec_mod(&fa, &self.x, q), &kb, q);
        if challenge_hash(&u1, &p.c, params.k, params.kappa) != p.e_prime {
            return Err("check (i): e' is not H(F_t a + x + K b, c)".into());
        }
        let fz = f.mul_vec_mod(&self.z, q).map_err(|e| e.to_string())?;
        let ke = pk.k.mul_vec_mod(&e_prime, q).map_err(|e| e.to_string())?;
        let u2 = sub_vec_mod(&add_vec_mod(&fa, &fz, q), &ke, q);
        if challenge_hash(&u2, &p.c, params.k, params.kappa) != p.e_prime {
            return Err("check (ii): e' is not H(F_t a + F_t z - K e', c)".into());
        }
        let z_prime = add_vec(&self.z, &p.a).map_err(|e| e.to_string())?;
        let bound = params.z_bound();
        let over_bound = norm_sq(&z_prime) as f64 >= bound * bound;
        let rejectable = accept_ratio(&z_prime, &self.z, width(params.sigma3), params.m3) < 1.0;
        if !(over_bound || rejectable) {
            return Err("check (iii): z + a would have been accepted".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserPhase {
    AwaitX,
    AwaitZ,
    Done,
}

pub enum UserOutcome {
    Accept(Signature),
    Restart(RestartPayload),
}

pub struct UserSession {
    pk: Arc<PublicKey>,
    f_t: IntMatrix,
    t: u64,
    mu: Vec<u8>,
    rng: RandomSource,
    phase: UserPhase,
    x: IntVector,
    a: IntVector,
    b: IntVector,
    d: BitString,
    c: BitString,
    e_prime: Vec<i8>,
    e: IntVector,
    stats: SignStats,
}

impl UserSession {
    pub fn new(pk: Arc<PublicKey>, t: u64, mu: &[u8], rng: RandomSource) -> Result<Self> {
        if t >= pk.params.tau {
            return Err(Error::PeriodOutOfRange { t, ell: pk.params.ell });
        }
        let f_t = pk.period_matrix(t)?;
        let empty = BitString::from_bytes(0, Vec::new()).expect("empty bit string");
        Ok(Self {
            pk,
            f_t,
            t,
            mu: mu.to_vec(),
            rng,
            phase: UserPhase::AwaitX,
            x: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
            d: empty.clone(),
            c: empty,
            e_prime: Vec::new(),
            e: Vec::new(),
            stats: SignStats::default(),
        })
    }

    pub fn phase(&self) -> UserPhase {
        self.phase
    }

    pub fn stats(&self) -> SignStats {
        self.stats
    }

    pub fn period(&self) -> u64 {
        self.t
    }

    pub fn blinding(&self) -> (&[i64], &[i64]) {
        (&self.a, &self.b)
    }

    pub fn challenge(&self) -> &[i8] {
        &self.e_prime
    }

    /// Phase 2: blinds the commitment and returns the challenge `e`. The
    /// local rejection loop redraws `a`, `b` and `d'` together. Also called
    /// when the signer restarted from Phase 1 while we awaited `z`.
    pub fn phase2(&mut self, x: &[i64]) -> Result<IntVector> {
        if self.phase == UserPhase::Done {
            return Err(Error::ProtocolViolation("commitment received after the session finished".into()));
        }
        let p = &self.pk.params;
        let q = p.modulus();
        if x.len() != p.n || x.iter().any(|&v| v < 0 || v as u64 >= p.q) {
            return Err(Error::ProtocolViolation("commitment x is not a reduced vector of length n".into()));
        }
        let (s1, s3) = (width(p.sigma1), width(p.sigma3));
        for _ in 0..PHASE2_MAX_ITERATIONS {
            let a = sample_zm(s3, p.total_width(), &mut self.rng);
            let b = sample_zm(s1, p.k, &mut self.rng);
            let d = BitString::random(p.n, &mut self.rng);
            let fa = self.f_t.mul_vec_mod(&a, q)?;
            let kb = self.pk.k.mul_vec_mod(&b, q)?;
            let u = add_vec_mod(&add_vec_mod(&fa, x, q), &kb, q);
            let c = commit(&self.mu, &d, p.n);
            let e_prime = challenge_hash(&u, &c, p.k, p.kappa);
            let ep = ternary_to_ints(&e_prime);
            let e = add_vec(&ep, &b)?;
            self.stats.phase2_attempts += 1;
            if rejection_step(&e, &ep, s1, p.m1, &mut self.rng) == Decision::Accept {
                self.stats.phase2_accepts += 1;
                self.x = x.to_vec();
                (self.a, self.b, self.d, self.c, self.e_prime) = (a, b, d, c, e_prime);
                self.e = e.clone();
                self.phase = UserPhase::AwaitZ;
                return Ok(e);
            }
        }
        Err(Error::Internal(format!("phase 2 did not accept within {PHASE2_MAX_ITERATIONS} iterations")))
    }

    /// Phase 4: `z' = z + a`, kept when the rejection step accepts and
    /// `|z'| <= sigma3 sqrt((1 + ell) m)`; otherwise asks for a restart.
    pub fn phase4(&mut self, z: &[i64]) -> Result<UserOutcome> {
        if self.phase != UserPhase::AwaitZ {
            return Err(Error::ProtocolViolation(format!("response received in user phase {:?}", self.phase)));
        }
        let p = &self.pk.params;
        let q = p.modulus();
        if z.len() != p.total_width() {
            return Err(Error::ProtocolViolation(format!("response of length {}, expected {}", z.len(), p.total_width())));
        }
        // F_t z = x + K e must hold for any honestly computed z
        let fz = self.f_t.mul_vec_mod(z, q)?;
        let ke = self.pk.k.mul_vec_mod(&self.e, q)?;
        if fz != add_vec_mod(&self.x, &ke, q) {
            return Err(Error::ProtocolViolation("response z is inconsistent with x and e".into()));
        }
        let z_prime = add_vec(z, &self.a)?;
        self.stats.phase4_attempts += 1;
        let decision = rejection_step(&z_prime, z, width(p.sigma3), p.m3, &mut self.rng);
        let bound = p.z_bound();
        let short = (norm_sq(&z_prime) as f64) <= bound * bound;
        if decision == Decision::Accept && short {
            self.stats.phase4_accepts += 1;
            self.phase = UserPhase::Done;
            Ok(UserOutcome::Accept(Signature { d: self.d.clone(), e_prime: self.e_prime.clone(), z: z_prime }))
        } else {
            self.phase = UserPhase::AwaitX;
            Ok(UserOutcome::Restart(RestartPayload {
                a: self.a.clone(),
                b: self.b.clone(),
                e_prime: self.e_prime.clone(),
                c: self.c.clone(),
            }))
        }
    }
}

/// Result of a complete signing interaction.
#[derive(Debug, Clone)]
pub struct SignOutput {
    pub t: u64,
    pub signature: Signature,
    pub view: View,
    pub stats: SignStats,
}

/// Drives both sessions in-process with the given randomness.
pub fn sign_with_sources(
    signer: &Arc<PeriodSigner>,
    mu: &[u8],
    signer_rng: RandomSource,
    user_rng: RandomSource,
) -> Result<SignOutput> {
    let (mut s, mut x) = signer.start(signer_rng)?;
    let mut u = UserSession::new(Arc::clone(&signer.pk), signer.t, mu, user_rng)?;
    loop {
        let e = u.phase2(&x)?;
        let z = match s.phase3(&e)? {
            Phase3Out::Z(z) => z,
            Phase3Out::RestartX(nx) => {
                x = nx;
                continue;
            }
        };
        let result = match u.phase4(&z)? {
            UserOutcome::Accept(sig) => {
                let Phase5Out::Done(view) = s.phase5(&UserResult::Accept)? else {
                    return Err(Error::Internal("accepted session did not finish".into()));
                };
                let mut stats = s.stats();
                stats.merge(&u.stats());
                return Ok(SignOutput { t: signer.t, signature: sig, view, stats });
            }
            UserOutcome::Restart(p) => UserResult::Restart(p),
        };
        match s.phase5(&result)? {
            Phase5Out::RestartX(nx) => x = nx,
            Phase5Out::Done(_) => return Err(Error::Internal("restart request ended the session".into())),
        }
    }
}

/// Seeds for the signer and user sides, in that order, drawn from `rng`.
pub fn session_seeds(rng: &mut RandomSource) -> (RandomSource, RandomSource) {
    let s = rng.next_seed();
    let u = rng.next_seed();
    (RandomSource::from_seed(s), RandomSource::from_seed(u))
}

/// `Sign` with both parties in-process.
pub fn sign_local(pk: &PublicKey, sk: &SecretKey, t: u64, mu: &[u8], rng: &mut RandomSource) -> Result<SignOutput> {
    let signer = Arc::new(PeriodSigner::new(Arc::new(pk.clone()), sk, t)?);
    let (s, u) = session_seeds(rng);
    sign_with_sources(&signer, mu, s, u)
}
