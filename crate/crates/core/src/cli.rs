//! The `fsbs` command-line tool.
//!
//! Exit codes: 0 success, 1 signature invalid, 2 parameter / file / time
//! errors, 3 backward key update, 4 restart limit, 5 protocol abort.

use std::fs;
use std::io::Write as _;
use std::net::{TcpListener, TcpStream};
use std::os::unix::net::UnixStream;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use serde_json::json;
use sha3::{Digest, Sha3_256};

use crate::codec::{decode_trapdoor, Reader, MATRIX_MAGIC, TRAPDOOR_MAGIC};
use crate::error::Error;
use crate::params::{preset_spec, ParamSpec, Params, Severity, PRESET_NAMES};
use crate::protocol::{mirrored_sources, run_signer, run_user, Channel, ServePolicy, SignerService};
use crate::rng::{parse_seed_hex, RandomSource, Seed};
use crate::scheme::{
    decode_public_key, decode_secret_key, decode_signature, encode_public_key, encode_secret_key, encode_signature,
    setup, sign_local, verify, PublicKey, SignStats, PK_MAGIC, SIG_MAGIC, SK_MAGIC,
};
use crate::timetree::{key_update, SecretKey};
use crate::zq::gram_schmidt;

// stdout may be a closed pipe (`fsbs inspect f | head`); that is not an error
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! say_raw {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BACKWARD: i32 = 3;
pub const EXIT_RESTARTS: i32 = 4;
pub const EXIT_ABORT: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "fsbs", version, about = "Forward-secure lattice blind signatures")]
pub struct Cli {
    /// 32-byte hex seed; makes the run deterministic
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Parameter profile (toy-tiny, toy-T0, toy-T1)
    #[arg(long, global = true, default_value = "toy-T0")]
    profile: String,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a key pair for period 0
    Keygen {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        /// Override a profile input, e.g. --set m=120
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Evolve a secret key file forward
    Update {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        /// Target period (default: the next one)
        #[arg(long)]
        to: Option<u64>,
    },
    /// Run the blind signing protocol (locally, or one side over TCP)
    Sign {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: Option<PathBuf>,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        message: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Act as the signer, listening on this address
        #[arg(long, conflicts_with = "connect")]
        serve: Option<String>,
        /// Act as the user, connecting to this address
        #[arg(long)]
        connect: Option<String>,
        /// Sessions to serve before exiting (with --serve)
        #[arg(long, default_value_t = 1)]
        sessions: usize,
        /// Write the signer's views as JSON (with --serve)
        #[arg(long)]
        view_out: Option<PathBuf>,
    },
    /// Verify a signature; exit 0 if valid, 1 if not
    Verify {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Print derived parameters and the constraint report
    Params {
        /// Override any field, e.g. --set kappa=6 or --set sigma1=10
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Write deterministic test vectors
    Vectors {
        #[arg(long)]
        out: PathBuf,
    },
    /// Describe a key, signature, trapdoor or matrix file
    Inspect {
        file: PathBuf,
        #[arg(long)]
        pk: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::RestartLimitExceeded(_) => EXIT_RESTARTS,
            Error::ProtocolViolation(_) | Error::AdversaryDetected(_) | Error::Wire(_) => EXIT_ABORT,
            _ => EXIT_USAGE,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

type CliResult = Result<i32, Failure>;

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Like [`run`] but with explicit arguments (the first is the program name).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_with(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run_with(cli: Cli) -> i32 {
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult {
    let seed = cli.seed.as_deref().map(parse_seed_hex).transpose().map_err(usage)?;
    match &cli.cmd {
        Command::Keygen { pk, sk, set } => cmd_keygen(cli, seed, pk, sk, set),
        Command::Update { pk, sk, to } => cmd_update(cli, pk, sk, *to),
        Command::Sign { pk, sk, t, message, out, serve, connect, sessions, view_out } => {
            let pk = Arc::new(load_pk(pk)?);
            if let Some(addr) = serve {
                let sk = sk.as_ref().ok_or_else(|| usage("--serve needs --sk"))?;
                cmd_serve(cli, seed, pk, sk, *t, addr, *sessions, view_out.as_deref())
            } else {
                let message = message.as_ref().ok_or_else(|| usage("signing needs --message"))?;
                let out = out.as_ref().ok_or_else(|| usage("signing needs --out"))?;
                let mu = read(message)?;
                match connect {
                    Some(addr) => cmd_connect(cli, seed, pk, *t, &mu, addr, out),
                    None => {
                        let sk = sk.as_ref().ok_or_else(|| usage("local signing needs --sk"))?;
                        cmd_sign_local(cli, seed, &pk, sk, *t, &mu, out)
                    }
                }
            }
        }
        Command::Verify { pk, t, message, sig } => cmd_verify(cli, pk, *t, message, sig),
        Command::Params { set } => cmd_params(cli, set),
        Command::Vectors { out } => cmd_vectors(cli, seed, out),
        Command::Inspect { file, pk } => cmd_inspect(cli, file, pk.as_deref()),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_pk(path: &Path) -> Result<PublicKey, Failure> {
    decode_public_key(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_sk(path: &Path, pk: &PublicKey) -> Result<SecretKey, Failure> {
    decode_secret_key(&read(path)?, pk).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn rng_from(seed: Option<Seed>) -> RandomSource {
    seed.map_or_else(RandomSource::from_entropy, RandomSource::from_seed)
}

fn profile_spec(name: &str) -> Result<ParamSpec, Failure> {
    preset_spec(name).ok_or_else(|| usage(format!("unknown profile {name:?} (known: {})", PRESET_NAMES.join(", "))))
}

fn split_set(item: &str) -> Result<(&str, &str), Failure> {
    item.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| usage(format!("--set {item:?}: expected key=value")))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Failure> {
    v.parse().map_err(|_| usage(format!("--set {key}: bad value {v:?}")))
}

/// Applies an input override; returns `false` for keys that are not inputs.
fn set_input(spec: &mut ParamSpec, key: &str, v: &str) -> Result<bool, Failure> {
    match key {
        "n" => spec.n = parse_num(key, v)?,
        "ell" => spec.ell = parse_num(key, v)?,
        "q" => spec.q = parse_num(key, v)?,
        "k" => spec.k = parse_num(key, v)?,
        "kappa" => spec.kappa = parse_num(key, v)?,
        "sigma" => spec.sigma = parse_num(key, v)?,
        "m" => spec.m = Some(parse_num(key, v)?),
        "gamma" => spec.gamma = Some(parse_num(key, v)?),
        _ => return Ok(false),
    }
    Ok(true)
}

fn set_derived(p: &mut Params, key: &str, v: &str) -> Result<(), Failure> {
    match key {
        "tau" => p.tau = parse_num(key, v)?,
        "sigma1" => p.sigma1 = parse_num(key, v)?,
        "sigma2" => p.sigma2 = parse_num(key, v)?,
        "sigma3" => p.sigma3 = parse_num(key, v)?,
        "m1" => p.m1 = parse_num(key, v)?,
        "m2" => p.m2 = parse_num(key, v)?,
        "m3" => p.m3 = parse_num(key, v)?,
        "beta" => p.beta = parse_num(key, v)?,
        _ => return Err(usage(format!("--set: unknown parameter {key:?}"))),
    }
    Ok(())
}

fn stats_json(s: &SignStats) -> serde_json::Value {
    serde_json::to_value(s).expect("stats serialize")
}

fn cmd_keygen(cli: &Cli, seed: Option<Seed>, pk_path: &Path, sk_path: &Path, set: &[String]) -> CliResult {
    let mut spec = profile_spec(&cli.profile)?;
    for item in set {
        let (k, v) = split_set(item)?;
        if !set_input(&mut spec, k, v)? {
            return Err(usage(format!("--set {k}: only n, ell, q, k, kappa, m, gamma can be set at keygen")));
        }
    }
    let mut rng = rng_from(seed);
    let started = Instant::now();
    let (params, pk, sk) = setup(&spec, &mut rng)?;
    let root = sk.nodes().next().expect("fresh key has the root node");
    let gs = gram_schmidt(root.basis())?.max_norm();
    write(pk_path, &encode_public_key(&pk))?;
    write(sk_path, &encode_secret_key(&sk))?;
    if cli.json {
        let out = json!({ "gs_norm": gs, "params": params, "seconds": started.elapsed().as_secs_f64() });
        say!("{out}");
    } else {
        say!("trapdoor GS norm |T~_A0| = {gs:.4}");
        say!("eta slack = {}", params.eta_slack());
        say!("sigma  = {}", params.sigma);
        say!("sigma1 = {}", params.sigma1);
        say!("sigma2 = {}", params.sigma2);
        say!("sigma3 = {}", params.sigma3);
        say!("wrote {} and {} in {:.2?}", pk_path.display(), sk_path.display(), started.elapsed());
    }
    Ok(EXIT_OK)
}

fn cmd_update(cli: &Cli, pk_path: &Path, sk_path: &Path, to: Option<u64>) -> CliResult {
    let pk = load_pk(pk_path)?;
    let mut sk = load_sk(sk_path, &pk)?;
    let from = sk.period();
    let target = to.unwrap_or(from + 1);
    if target < from {
        return Err(Failure { code: EXIT_BACKWARD, msg: format!("refusing to move the key back from period {from} to {target}") });
    }
    if target > sk.tau() {
        return Err(usage(format!("period {target} is past the end of the tree (tau = {})", sk.tau())));
    }
    let q = pk.params.modulus();
    while sk.period() < target {
        sk = key_update(&pk.tree, q, sk)?;
    }
    write(sk_path, &encode_secret_key(&sk))?;
    let nodes: Vec<String> = sk.node_ids().iter().map(|n| n.to_string()).collect();
    if cli.json {
        say!("{}", json!({ "from": from, "t": sk.period(), "expired": sk.is_expired(), "nodes": nodes }));
    } else if sk.is_expired() {
        say!("key advanced {from} -> {}: past the last period, key is now empty", sk.period());
    } else {
        say!("key advanced {from} -> {}: nodes {{{}}}", sk.period(), nodes.join(", "));
    }
    Ok(EXIT_OK)
}

fn check_period(sk: &SecretKey, t: u64) -> Result<(), Failure> {
    if sk.is_expired() {
        return Err(Error::LastPeriod.into());
    }
    if sk.period() != t {
        return Err(Error::TimeMismatch { key: sk.period(), requested: t }.into());
    }
    Ok(())
}

fn report_sign(cli: &Cli, out: &Path, t: u64, stats: &SignStats) {
    if cli.json {
        say!("{}", json!({ "t": t, "signature": out.display().to_string(), "stats": stats_json(stats) }));
    } else {
        say!("signed for period {t} after {} restarts; wrote {}", stats.restarts, out.display());
    }
}

fn cmd_sign_local(cli: &Cli, seed: Option<Seed>, pk: &PublicKey, sk: &Path, t: u64, mu: &[u8], out: &Path) -> CliResult {
    let sk = load_sk(sk, pk)?;
    check_period(&sk, t)?;
    let mut rng = rng_from(seed);
    let res = sign_local(pk, &sk, t, mu, &mut rng)?;
    write(out, &encode_signature(t, &res.signature))?;
    report_sign(cli, out, t, &res.stats);
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_serve(
    cli: &Cli,
    seed: Option<Seed>,
    pk: Arc<PublicKey>,
    sk: &Path,
    t: u64,
    addr: &str,
    sessions: usize,
    view_out: Option<&Path>,
) -> CliResult {
    let sk = load_sk(sk, &pk)?;
    check_period(&sk, t)?;
    let service = Arc::new(SignerService::new(pk, sk)?);
    let listener = TcpListener::bind(addr).map_err(|e| usage(format!("bind {addr}: {e}")))?;
    let bound = listener.local_addr().map_or(addr.to_string(), |a| a.to_string());
    if cli.json {
        say!("{}", json!({ "listening": bound, "t": t }));
    } else {
        say!("serving period {t} on {bound}");
    }
    let _ = std::io::stdout().flush();
    let policy = ServePolicy { max_sessions: Some(sessions), seed };
    let results = run_signer(&listener, service, &policy);
    let mut views = Vec::new();
    let mut first_err: Option<Failure> = None;
    for (i, (res, _)) in results.into_iter().enumerate() {
        match res {
            Ok((view, stats)) => {
                if !cli.json {
                    say!("session {i}: completed after {} restarts", stats.restarts);
                }
                views.push(json!({ "session": i, "view": view, "stats": stats_json(&stats) }));
            }
            Err(e) => {
                eprintln!("session {i}: {e}");
                views.push(json!({ "session": i, "error": e.to_string() }));
                first_err.get_or_insert(e.into());
            }
        }
    }
    let doc = serde_json::Value::Array(views);
    if let Some(path) = view_out {
        write(path, serde_json::to_string_pretty(&doc).expect("json").as_bytes())?;
    }
    if cli.json {
        say!("{doc}");
    }
    first_err.map_or(Ok(EXIT_OK), Err)
}

fn connect_with_retry(addr: &str) -> Result<TcpStream, Failure> {
    let deadline = Instant::now() + Duration::from_secs(10);
    loop {
        match TcpStream::connect(addr) {
            Ok(s) => return Ok(s),
            Err(e) if Instant::now() >= deadline => return Err(usage(format!("connect {addr}: {e}"))),
            Err(_) => thread::sleep(Duration::from_millis(50)),
        }
    }
}

fn cmd_connect(cli: &Cli, seed: Option<Seed>, pk: Arc<PublicKey>, t: u64, mu: &[u8], addr: &str, out: &Path) -> CliResult {
    let rng = match seed {
        Some(s) => mirrored_sources(s, 0).1,
        None => RandomSource::from_entropy(),
    };
    let stream = connect_with_retry(addr)?;
    let mut chan = Channel::user(stream);
    let run = run_user(&mut chan, pk, t, mu, rng)?;
    write(out, &encode_signature(t, &run.signature))?;
    report_sign(cli, out, t, &run.stats);
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, pk: &Path, t: u64, message: &Path, sig: &Path) -> CliResult {
    let pk = load_pk(pk)?;
    let mu = read(message)?;
    let (_, sig) = decode_signature(&read(sig)?, &pk.params)?;
    let ok = verify(&pk, t, &mu, &sig);
    if cli.json {
        say!("{}", json!({ "t": t, "valid": ok }));
    } else {
        say!("{}", if ok { "valid" } else { "invalid" });
    }
    Ok(if ok { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_params(cli: &Cli, set: &[String]) -> CliResult {
    let mut spec = profile_spec(&cli.profile)?;
    let mut derived = Vec::new();
    for item in set {
        let (k, v) = split_set(item)?;
        if !set_input(&mut spec, k, v)? {
            derived.push((k, v));
        }
    }
    let mut p = spec.derive_unchecked()?;
    for (k, v) in derived {
        set_derived(&mut p, k, v)?;
    }
    let report = p.validate();
    if cli.json {
        let out = json!({ "profile": cli.profile, "params": p, "eta_slack": p.eta_slack(), "violations": report });
        say!("{}", serde_json::to_string_pretty(&out).expect("json"));
    } else {
        say!("# profile {}", cli.profile);
        say_raw!("{}", p.to_text());
        say!("# eta_slack={}", p.eta_slack());
        if report.is_empty() {
            say!("# all constraints hold");
        }
        for v in &report {
            say!("# {v}");
        }
        let errors = report.iter().filter(|v| v.severity == Severity::Error).count();
        say!("# {errors} error(s), {} note(s)", report.len() - errors);
    }
    Ok(EXIT_OK)
}

fn sha3_hex(bytes: &[u8]) -> String {
    hex::encode(Sha3_256::digest(bytes))
}

/// Runs one two-party session over an in-process socket pair.
fn two_party_session(
    service: &Arc<SignerService>,
    t: u64,
    mu: &[u8],
    seed: Seed,
    index: u64,
) -> crate::Result<(crate::scheme::Signature, SignStats, crate::protocol::Transcript)> {
    let (a, b) = UnixStream::pair()?;
    let (srng, urng) = mirrored_sources(seed, index);
    let svc = Arc::clone(service);
    let signer = thread::spawn(move || svc.serve(a, srng));
    let mut chan = Channel::user(b);
    let run = run_user(&mut chan, Arc::clone(service.public_key()), t, mu, urng);
    let (served, _) = signer.join().map_err(|_| Error::Internal("signer thread panicked".into()))?;
    let run = run?;
    served?;
    Ok((run.signature, run.stats, chan.into_transcript()))
}

fn cmd_vectors(cli: &Cli, seed: Option<Seed>, out: &Path) -> CliResult {
    let seed = seed.ok_or_else(|| usage("vectors needs --seed"))?;
    let spec = profile_spec(&cli.profile)?;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut rng = RandomSource::from_seed(seed);
    let (params, pk, sk0) = setup(&spec, &mut rng)?;
    files.push(("params.txt".into(), params.to_text().into_bytes()));
    files.push(("pk.fspk".into(), encode_public_key(&pk)));
    let pk = Arc::new(pk);
    let q = params.modulus();
    let session_seed = rng.next_seed();
    let mut sk = sk0;
    let mut sessions = Vec::new();
    let mut restart_seen = false;
    let mut index = 0u64;
    for t in 0..=params.tau {
        files.push((format!("sk/t{t}.fssk"), encode_secret_key(&sk)));
        if t == params.tau {
            break;
        }
        let service = Arc::new(SignerService::new(Arc::clone(&pk), sk.clone())?);
        let mut extra = 0;
        loop {
            let name = if extra == 0 { format!("t{t}") } else { format!("t{t}_{extra}") };
            let mu = format!("test vector period {t} session {extra}").into_bytes();
            let (sig, stats, transcript) = two_party_session(&service, t, &mu, session_seed, index)?;
            index += 1;
            debug_assert!(verify(&pk, t, &mu, &sig));
            transcript.check_grammar().map_err(|e| Error::Internal(format!("transcript grammar: {e}")))?;
            restart_seen |= stats.restarts > 0;
            files.push((format!("msg/{name}.bin"), mu));
            files.push((format!("sig/{name}.fssg"), encode_signature(t, &sig)));
            files.push((format!("transcript/{name}.bin"), transcript.to_bytes()));
            let kinds: Vec<String> = transcript.kinds().iter().map(|k| k.to_string()).collect();
            sessions.push(json!({ "name": name, "t": t, "restarts": stats.restarts, "kinds": kinds }));
            extra += 1;
            // period 0 keeps going until some transcript shows a restart
            if t > 0 || restart_seen || extra >= 64 {
                break;
            }
        }
        sk = key_update(&pk.tree, q, sk)?;
    }
    let mut manifest = Vec::new();
    for (name, bytes) in &files {
        write(&out.join(name), bytes)?;
        manifest.push(json!({ "file": name, "sha3_256": sha3_hex(bytes) }));
    }
    let doc = json!({
        "profile": cli.profile,
        "seed": hex::encode(seed),
        "files": manifest,
        "sessions": sessions,
    });
    write(&out.join("manifest.json"), serde_json::to_string_pretty(&doc).expect("json").as_bytes())?;
    if cli.json {
        say!("{doc}");
    } else {
        say!("wrote {} files to {}", files.len() + 1, out.display());
    }
    Ok(EXIT_OK)
}

fn cmd_inspect(cli: &Cli, file: &Path, pk_path: Option<&Path>) -> CliResult {
    let bytes = read(file)?;
    let magic: [u8; 4] = bytes.get(..4).and_then(|m| m.try_into().ok()).ok_or_else(|| usage("file too short"))?;
    let pk = pk_path.map(load_pk).transpose()?;
    let info = match &magic {
        m if m == PK_MAGIC => {
            let pk = decode_public_key(&bytes)?;
            json!({ "type": "public key", "params": pk.params, "blocks": 2 * pk.tree.blocks.len() + 1 })
        }
        m if m == SK_MAGIC => match &pk {
            Some(pk) => {
                let sk = decode_secret_key(&bytes, pk)?;
                let nodes: Vec<String> = sk.node_ids().iter().map(|n| n.to_string()).collect();
                json!({ "type": "secret key", "t": sk.period(), "ell": sk.ell(), "expired": sk.is_expired(), "nodes": nodes, "verified": true })
            }
            None => {
                let mut r = Reader::new(&bytes[4..]);
                let version = r.u8()?;
                let t = r.u32()?;
                let ell = r.u8()?;
                let count = r.u16()?;
                json!({ "type": "secret key", "version": version, "t": t, "ell": ell, "nodes": count, "verified": false })
            }
        },
        m if m == SIG_MAGIC => {
            let pk = pk.as_ref().ok_or_else(|| usage("inspecting a signature needs --pk"))?;
            let (t, sig) = decode_signature(&bytes, &pk.params)?;
            let norm = (crate::zq::norm_sq(&sig.z) as f64).sqrt();
            json!({
                "type": "signature", "t": t, "d": hex::encode(sig.d.as_bytes()), "e_prime": sig.e_prime,
                "z_norm": norm, "z_bound": pk.params.z_bound(),
            })
        }
        m if m == TRAPDOOR_MAGIC => {
            let q = pk.as_ref().map(|pk| pk.params.modulus()).ok_or_else(|| usage("inspecting a trapdoor needs --pk"))?;
            let pair = decode_trapdoor(&bytes, q)?;
            json!({ "type": "trapdoor", "a": pair.a.shape(), "t": pair.t.shape(), "gs_norm": pair.gs_norm })
        }
        m if m == MATRIX_MAGIC => {
            let mat = crate::codec::decode_matrix(&bytes)?;
            json!({ "type": "matrix", "rows": mat.rows(), "cols": mat.cols(), "max_abs": mat.max_abs() })
        }
        _ => return Err(usage(format!("unrecognized magic {:?}", String::from_utf8_lossy(&magic)))),
    };
    if cli.json {
        say!("{info}");
    } else {
        say!("{}", serde_json::to_string_pretty(&info).expect("json"));
    }
    Ok(EXIT_OK)
}
