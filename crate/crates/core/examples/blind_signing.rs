//! Runs the blind signing protocol in-process for a few messages, then
//! verifies the signatures and shows what the signer saw.
//!
//!     cargo run --release --example blind_signing [profile]

use std::sync::Arc;

use fsbs::params::preset_spec;
use fsbs::rng::RandomSource;
use fsbs::scheme::{session_seeds, setup, sign_with_sources, verify, PeriodSigner, SignStats};

fn main() -> fsbs::Result<()> {
    let profile = std::env::args().nth(1).unwrap_or_else(|| "toy-T0".into());
    let spec = preset_spec(&profile).ok_or_else(|| fsbs::Error::Param(format!("unknown profile {profile}")))?;
    let mut rng = RandomSource::from_seed([1; 32]);
    let (params, pk, sk) = setup(&spec, &mut rng)?;
    println!("{profile}: sigma = {}, sigma1 = {}, |z'| bound = {:.0}", params.sigma, params.sigma1, params.z_bound());

    let pk = Arc::new(pk);
    let signer = Arc::new(PeriodSigner::new(Arc::clone(&pk), &sk, 0)?);
    let mut total = SignStats::default();
    for msg in ["pay alice 5", "pay bob 7", "vote yes"] {
        let (signer_rng, user_rng) = session_seeds(&mut rng);
        let out = sign_with_sources(&signer, msg.as_bytes(), signer_rng, user_rng)?;
        let ok = verify(&pk, 0, msg.as_bytes(), &out.signature);
        let hidden = verify(&pk, 0, b"something else", &out.signature);
        println!(
            "{msg:>12}: valid {ok}, valid for another message {hidden}, restarts {}, signer saw e[..4] = {:?}",
            out.stats.restarts,
            &out.view.e[..4]
        );
        total.merge(&out.stats);
    }
    println!("phase 3 acceptance {}/{}", total.phase3_accepts, total.phase3_attempts);
    Ok(())
}
