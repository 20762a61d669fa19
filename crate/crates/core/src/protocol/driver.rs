//! Session drivers over any reliable ordered byte stream.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, RwLock};
use std::thread;
use std::time::Instant;

use super::{Direction, Kind, Message, Transcript, TranscriptEntry, WireMessage, HEADER_LEN};
use crate::error::{Error, Result};
use crate::rng::{RandomSource, Seed};
use crate::scheme::{
    session_seeds, Phase3Out, Phase5Out, PeriodSigner, PublicKey, SignStats, Signature, UserOutcome, UserResult,
    UserSession, View, MAX_RESTARTS,
};
use crate::timetree::{key_update, SecretKey};

/// One side of a connection; records every frame in a [`Transcript`].
pub struct Channel<S> {
    stream: S,
    side: Direction,
    transcript: Transcript,
    start: Instant,
    peer_aborted: bool,
}

impl<S: Read + Write> Channel<S> {
    /// `side` is the direction of frames this end sends.
    pub fn new(stream: S, side: Direction) -> Self {
        Self { stream, side, transcript: Transcript::default(), start: Instant::now(), peer_aborted: false }
    }

    pub fn signer(stream: S) -> Self {
        Self::new(stream, Direction::SignerToUser)
    }

    pub fn user(stream: S) -> Self {
        Self::new(stream, Direction::UserToSigner)
    }

    fn record(&mut self, direction: Direction, message: WireMessage) {
        let micros = self.start.elapsed().as_micros();
        self.transcript.entries.push(TranscriptEntry { direction, message, micros });
    }

    pub fn send(&mut self, msg: &Message) -> Result<()> {
        let wire = msg.to_wire();
        self.stream.write_all(&wire.encode())?;
        self.stream.flush()?;
        self.record(self.side, wire);
        Ok(())
    }

    pub fn recv(&mut self) -> Result<WireMessage> {
        let mut header = [0u8; HEADER_LEN];
        self.stream.read_exact(&mut header)?;
        let (kind, len) = WireMessage::parse_header(&header)?;
        let mut payload = vec![0u8; len];
        self.stream.read_exact(&mut payload)?;
        let msg = WireMessage { kind, payload };
        let other = match self.side {
            Direction::SignerToUser => Direction::UserToSigner,
            Direction::UserToSigner => Direction::SignerToUser,
        };
        self.record(other, msg.clone());
        Ok(msg)
    }

    /// Receives a frame whose kind must be in `allowed`; ABORT from the
    /// peer ends the session.
    fn expect(&mut self, allowed: &[Kind], pk: &PublicKey) -> Result<Message> {
        let wire = self.recv()?;
        if wire.kind == Kind::Abort {
            self.peer_aborted = true;
            return Err(Error::ProtocolViolation(format!(
                "peer aborted: {}",
                String::from_utf8_lossy(&wire.payload)
            )));
        }
        if !allowed.contains(&wire.kind) {
            let want: Vec<String> = allowed.iter().map(|k| k.to_string()).collect();
            return Err(Error::ProtocolViolation(format!("got {}, expected {}", wire.kind, want.join(" or "))));
        }
        Message::from_wire(&wire, &pk.params)
    }

    /// Sends ABORT for local failures other than transport errors.
    fn abort_on_error<T>(&mut self, res: Result<T>) -> Result<T> {
        if let Err(e) = &res {
            if !self.peer_aborted && !matches!(e, Error::Io(_)) {
                let _ = self.send(&Message::Abort(e.to_string()));
            }
        }
        res
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

/// A signer's current period: the secret key and its signing context.
struct Epoch {
    sk: SecretKey,
    signer: Option<Arc<PeriodSigner>>,
}

/// Shared signer state. Sessions hold a read guard on the epoch for their
/// whole run, so [`SignerService::update`] waits for open sessions of the
/// old period to drain.
pub struct SignerService {
    pk: Arc<PublicKey>,
    epoch: RwLock<Epoch>,
}

impl SignerService {
    pub fn new(pk: Arc<PublicKey>, sk: SecretKey) -> Result<Self> {
        let signer = Self::period_signer(&pk, &sk)?;
        Ok(Self { pk, epoch: RwLock::new(Epoch { sk, signer }) })
    }

    fn period_signer(pk: &Arc<PublicKey>, sk: &SecretKey) -> Result<Option<Arc<PeriodSigner>>> {
        if sk.is_expired() {
            return Ok(None);
        }
        Ok(Some(Arc::new(PeriodSigner::new(Arc::clone(pk), sk, sk.period())?)))
    }

    pub fn public_key(&self) -> &Arc<PublicKey> {
        &self.pk
    }

    pub fn period(&self) -> u64 {
        self.epoch.read().expect("epoch lock").sk.period()
    }

    /// Evolves the key to the next period once no session is open.
    pub fn update(&self) -> Result<u64> {
        let mut epoch = self.epoch.write().expect("epoch lock");
        let q = self.pk.params.modulus();
        let next = key_update(&self.pk.tree, q, epoch.sk.clone())?;
        epoch.signer = Self::period_signer(&self.pk, &next)?;
        epoch.sk = next;
        Ok(epoch.sk.period())
    }

    pub fn secret_key(&self) -> SecretKey {
        self.epoch.read().expect("epoch lock").sk.clone()
    }

    /// Serves one session on `stream`.
    pub fn serve<S: Read + Write>(&self, stream: S, rng: RandomSource) -> (Result<(View, SignStats)>, Transcript) {
        let mut chan = Channel::signer(stream);
        let res = serve_session(&mut chan, self, rng);
        (res, chan.into_transcript())
    }
}

/// Signer side of one session: HELLO, then Phases 1, 3 and 5 with restarts.
pub fn serve_session<S: Read + Write>(
    chan: &mut Channel<S>,
    service: &SignerService,
    rng: RandomSource,
) -> Result<(View, SignStats)> {
    let res = serve_inner(chan, service, rng);
    chan.abort_on_error(res)
}

fn serve_inner<S: Read + Write>(
    chan: &mut Channel<S>,
    service: &SignerService,
    rng: RandomSource,
) -> Result<(View, SignStats)> {
    let pk = &service.pk;
    let Message::Hello { t } = chan.expect(&[Kind::Hello], pk)? else { unreachable!() };
    let epoch = service.epoch.read().expect("epoch lock");
    let signer = epoch.signer.as_ref().ok_or(Error::LastPeriod)?;
    if t != signer.period() {
        return Err(Error::TimeMismatch { key: signer.period(), requested: t });
    }
    let (mut session, x) = signer.start(rng)?;
    chan.send(&Message::X(x))?;
    loop {
        let Message::E(e) = chan.expect(&[Kind::E], pk)? else { unreachable!() };
        match session.phase3(&e)? {
            Phase3Out::Z(z) => chan.send(&Message::Z(z))?,
            Phase3Out::RestartX(x) => {
                chan.send(&Message::RestartX(x))?;
                continue;
            }
        }
        let result = match chan.expect(&[Kind::ResultAccept, Kind::ResultRestart], pk)? {
            Message::ResultRestart(p) => UserResult::Restart(p),
            _ => UserResult::Accept,
        };
        match session.phase5(&result)? {
            Phase5Out::Done(view) => return Ok((view, session.stats())),
            Phase5Out::RestartX(x) => chan.send(&Message::RestartX(x))?,
        }
    }
}

/// What the user obtains from a remote signing session.
#[derive(Debug, Clone)]
pub struct UserRun {
    pub signature: Signature,
    pub stats: SignStats,
}

/// User side of one session: Phases 2 and 4, with honest restart requests.
pub fn run_user<S: Read + Write>(
    chan: &mut Channel<S>,
    pk: Arc<PublicKey>,
    t: u64,
    mu: &[u8],
    rng: RandomSource,
) -> Result<UserRun> {
    let res = user_inner(chan, pk, t, mu, rng);
    chan.abort_on_error(res)
}

fn user_inner<S: Read + Write>(
    chan: &mut Channel<S>,
    pk: Arc<PublicKey>,
    t: u64,
    mu: &[u8],
    rng: RandomSource,
) -> Result<UserRun> {
    let mut user = UserSession::new(Arc::clone(&pk), t, mu, rng)?;
    chan.send(&Message::Hello { t })?;
    let Message::X(mut x) = chan.expect(&[Kind::X], &pk)? else { unreachable!() };
    let mut restarts = 0u32;
    let bump = |restarts: &mut u32| {
        *restarts += 1;
        if *restarts > MAX_RESTARTS {
            Err(Error::RestartLimitExceeded(MAX_RESTARTS))
        } else {
            Ok(())
        }
    };
    loop {
        let e = user.phase2(&x)?;
        chan.send(&Message::E(e))?;
        let z = match chan.expect(&[Kind::Z, Kind::RestartX], &pk)? {
            Message::RestartX(nx) => {
                bump(&mut restarts)?;
                x = nx;
                continue;
            }
            Message::Z(z) => z,
            _ => unreachable!(),
        };
        match user.phase4(&z)? {
            UserOutcome::Accept(signature) => {
                chan.send(&Message::ResultAccept)?;
                let mut stats = user.stats();
                stats.restarts = restarts;
                return Ok(UserRun { signature, stats });
            }
            UserOutcome::Restart(p) => {
                chan.send(&Message::ResultRestart(p))?;
                let Message::RestartX(nx) = chan.expect(&[Kind::RestartX], &pk)? else { unreachable!() };
                bump(&mut restarts)?;
                x = nx;
            }
        }
    }
}

/// How [`run_signer`] accepts connections.
#[derive(Debug, Clone, Default)]
pub struct ServePolicy {
    /// Stop after this many connections (serve forever when `None`).
    pub max_sessions: Option<usize>,
    /// Derive session randomness from this seed instead of OS entropy.
    pub seed: Option<Seed>,
}

/// Signer and user randomness for session `index` under `seed`; session 0
/// matches what [`crate::scheme::sign_local`] draws from `RandomSource::from_seed(seed)`.
pub fn mirrored_sources(seed: Seed, index: u64) -> (RandomSource, RandomSource) {
    session_seeds(&mut RandomSource::with_domain(seed, index))
}

/// Accepts connections, serving each on its own thread. Results are in
/// connection order; transport failures and panics become per-session errors.
pub fn run_signer(
    listener: &TcpListener,
    service: Arc<SignerService>,
    policy: &ServePolicy,
) -> Vec<(Result<(View, SignStats)>, Transcript)> {
    let mut handles = Vec::new();
    let mut index = 0u64;
    while policy.max_sessions.is_none_or(|m| (index as usize) < m) {
        let stream = match listener.accept() {
            Ok((s, _)) => s,
            Err(e) => {
                handles.push(Err(Error::from(e)));
                index += 1;
                continue;
            }
        };
        let rng = match policy.seed {
            Some(seed) => mirrored_sources(seed, index).0,
            None => RandomSource::from_entropy(),
        };
        let svc = Arc::clone(&service);
        handles.push(Ok(thread::spawn(move || svc.serve(stream, rng))));
        index += 1;
    }
    handles
        .into_iter()
        .map(|h| match h {
            Ok(h) => h
                .join()
                .unwrap_or_else(|_| (Err(Error::Internal("session thread panicked".into())), Transcript::default())),
            Err(e) => (Err(e), Transcript::default()),
        })
        .collect()
}


