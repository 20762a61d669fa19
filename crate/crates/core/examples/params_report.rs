//! Prints every preset with its constraint report, and shows what breaks
//! when a parameter is pushed out of range.
//!
//!     cargo run --release --example params_report

use fsbs::params::{preset_spec, Severity, PRESET_NAMES};

fn main() -> fsbs::Result<()> {
    for name in PRESET_NAMES {
        let p = preset_spec(name).expect("preset").build()?;
        println!("== {name}: n={} ell={} q={} m={} k={} kappa={}", p.n, p.ell, p.q, p.m, p.k, p.kappa);
        println!("   sigma={} sigma1={:.2} sigma2={:.4e} sigma3={:.4e} beta={:.4e}", p.sigma, p.sigma1, p.sigma2, p.sigma3, p.beta);
        for v in p.validate() {
            println!("   {v}");
        }
    }

    let mut spec = preset_spec("toy-T0").expect("preset");
    spec.m = Some(40);
    spec.kappa = 20;
    let broken = spec.derive_unchecked()?;
    let errors: Vec<_> = broken.validate().into_iter().filter(|v| v.severity == Severity::Error).collect();
    println!("== toy-T0 with m=40, kappa=20: {} errors", errors.len());
    for v in errors {
        println!("   {v}");
    }
    Ok(())
}
