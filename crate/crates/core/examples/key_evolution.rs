//! Walks a secret key through every period of a small tree, printing the
//! stored node set and checking that past leaves can no longer be reached.
//!
//!     cargo run --release --example key_evolution

use fsbs::params::preset_spec;
use fsbs::rng::RandomSource;
use fsbs::scheme::setup;
use fsbs::timetree::{derive_node_key, key_update, leaf_path, minimal_cover};
use fsbs::Error;

fn main() -> fsbs::Result<()> {
    let (params, pk, mut sk) = setup(&preset_spec("toy-tiny").expect("preset"), &mut RandomSource::from_seed([3; 32]))?;
    let q = params.modulus();
    println!("depth {} tree, {} periods", params.ell, params.tau);
    for t in 0..params.tau {
        let stored: Vec<String> = sk.node_ids().iter().map(|w| w.to_string()).collect();
        assert_eq!(sk.node_ids(), minimal_cover(t, params.ell)?);
        let leaf = sk.leaf_key(&pk.tree, q, t)?;
        let past_blocked = (0..t).all(|old| {
            let path = leaf_path(old, params.ell).expect("leaf");
            sk.nodes()
                .all(|k| matches!(derive_node_key(&pk.tree, q, k, &path), Err(Error::NotAnAncestor { .. })))
        });
        println!(
            "t = {t}: nodes {{{}}}, leaf {} derived, earlier leaves unreachable: {past_blocked}",
            stored.join(", "),
            leaf.node()
        );
        sk = key_update(&pk.tree, q, sk)?;
    }
    println!("after the last period: expired = {}, {} nodes", sk.is_expired(), sk.node_ids().len());
    match key_update(&pk.tree, q, sk) {
        Err(e) => println!("one more update: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
