//! Writes the deterministic test-vector set (the same files as
//! `fsbs vectors`) and lists the manifest.
//!
//!     cargo run --release --example test_vectors [out-dir]

use std::io::Write;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/vectors".into());
    let seed = "00".repeat(32);
    let code = fsbs::cli::run_from(["fsbs", "--seed", &seed, "vectors", "--out", &out]);
    if code != 0 {
        std::process::exit(code);
    }
    let manifest = std::fs::read_to_string(format!("{out}/manifest.json")).expect("manifest");
    let doc: serde_json::Value = serde_json::from_str(&manifest).expect("manifest json");
    let mut stdout = std::io::stdout().lock();
    for f in doc["files"].as_array().into_iter().flatten() {
        let line = format!("{}  {}", f["sha3_256"].as_str().unwrap_or(""), f["file"].as_str().unwrap_or(""));
        if writeln!(stdout, "{line}").is_err() {
            break;
        }
    }
}
