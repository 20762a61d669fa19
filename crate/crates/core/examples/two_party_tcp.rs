//! Signer and user talking over a loopback TCP socket, with the signer
//! moving to the next period between sessions.
//!
//!     cargo run --release --example two_party_tcp

use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use fsbs::params::preset_spec;
use fsbs::protocol::{run_signer, run_user, Channel, ServePolicy, SignerService};
use fsbs::rng::RandomSource;
use fsbs::scheme::{setup, verify};

fn main() -> fsbs::Result<()> {
    let (_, pk, sk) = setup(&preset_spec("toy-T0").expect("preset"), &mut RandomSource::from_seed([2; 32]))?;
    let pk = Arc::new(pk);
    let service = Arc::new(SignerService::new(Arc::clone(&pk), sk)?);

    for round in 0..2 {
        let t = service.period();
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let svc = Arc::clone(&service);
        let server = thread::spawn(move || {
            run_signer(&listener, svc, &ServePolicy { max_sessions: Some(3), seed: None })
        });

        let clients: Vec<_> = (0..3)
            .map(|i| {
                let pk = Arc::clone(&pk);
                thread::spawn(move || -> fsbs::Result<bool> {
                    let msg = format!("round {round} message {i}");
                    let mut chan = Channel::user(TcpStream::connect(addr)?);
                    let run = run_user(&mut chan, Arc::clone(&pk), t, msg.as_bytes(), RandomSource::from_entropy())?;
                    println!("  user {i}: {} frames, {} restarts", chan.transcript().entries.len(), run.stats.restarts);
                    Ok(verify(&pk, t, msg.as_bytes(), &run.signature))
                })
            })
            .collect();
        println!("period {t}:");
        for c in clients {
            println!("  signature valid: {}", c.join().expect("client thread")?);
        }
        for (i, (res, transcript)) in server.join().expect("server thread").into_iter().enumerate() {
            let kinds: Vec<String> = transcript.kinds().iter().map(|k| k.to_string()).collect();
            println!("  signer session {i}: ok = {}, frames {}", res.is_ok(), kinds.join(" "));
        }
        service.update()?;
    }
    Ok(())
}
