//! Binary time tree: covers, node matrices, delegation and key evolution.

mod common;

use common::{bits_to_string, cover_oracle};
use fsbs::params::preset_spec;
use fsbs::rng::RandomSource;
use fsbs::scheme::{decode_secret_key, encode_secret_key, setup, PublicKey};
use fsbs::timetree::{derive_node_key, key_update, leaf_path, minimal_cover, node_matrix, NodeId, NodeKey, SecretKey};
use fsbs::zq::{concat_cols, is_basis_of_lambda_perp, Modulus};
use fsbs::Error;
use proptest::prelude::*;

fn node(s: &str) -> NodeId {
    NodeId::parse(s).unwrap()
}

fn names(ids: &[NodeId]) -> Vec<String> {
    let mut v: Vec<String> = ids.iter().map(|w| w.to_string()).collect();
    v.sort();
    v
}

fn tiny() -> (PublicKey, SecretKey, Modulus) {
    let (params, pk, sk) = setup(&preset_spec("toy-tiny").unwrap(), &mut RandomSource::from_seed([7; 32])).unwrap();
    assert_eq!(params.ell, 3);
    (pk, sk, params.modulus())
}

fn check_key(pk: &PublicKey, q: Modulus, sk: &SecretKey) {
    assert_eq!(sk.node_ids(), minimal_cover(sk.period(), sk.ell()).unwrap());
    for key in sk.nodes() {
        let f = node_matrix(&pk.tree, key.node()).unwrap();
        assert!(is_basis_of_lambda_perp(&f, key.basis(), q), "node {}", key.node());
        for old in 0..sk.period() {
            assert!(!key.node().is_ancestor_of(&leaf_path(old, sk.ell()).unwrap()));
        }
    }
}

#[test]
fn leaf_paths() {
    assert_eq!(leaf_path(0, 3).unwrap().to_string(), "000");
    assert_eq!(leaf_path(5, 3).unwrap().to_string(), "101");
    assert_eq!(leaf_path(7, 3).unwrap().to_string(), "111");
    assert!(matches!(leaf_path(8, 3), Err(Error::PeriodOutOfRange { .. })));
}

#[test]
fn covers_for_depth_three() {
    assert_eq!(names(&minimal_cover(0, 3).unwrap()), ["ε"]);
    assert_eq!(names(&minimal_cover(1, 3).unwrap()), ["001", "01", "1"]);
    assert_eq!(names(&minimal_cover(2, 3).unwrap()), ["01", "1"]);
    assert_eq!(names(&minimal_cover(5, 3).unwrap()), ["101", "11"]);
    assert!(minimal_cover(8, 3).is_err());
}

proptest! {
    #[test]
    fn cover_matches_oracle_on_deep_trees(ell in 6u8..=10, t_raw in any::<u64>()) {
        let t = t_raw % (1 << ell);
        let got: Vec<String> = minimal_cover(t, ell).unwrap().iter().map(|w| w.to_string()).collect();
        let want: Vec<String> = cover_oracle(t, ell).iter().map(|w| bits_to_string(w)).collect();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn node_matrices_follow_the_path() {
    let (pk, _, _) = tiny();
    let t = &pk.tree;
    assert_eq!(node_matrix(t, &NodeId::root()).unwrap(), t.a0);
    let want = concat_cols(&[&t.a0, &t.blocks[0][0], &t.blocks[1][1]]).unwrap();
    assert_eq!(node_matrix(t, &node("01")).unwrap(), want);
    let want = concat_cols(&[&t.a0, &t.blocks[0][0], &t.blocks[1][0], &t.blocks[2][1]]).unwrap();
    assert_eq!(node_matrix(t, &node("001")).unwrap(), want);
}

#[test]
fn delegation_routes() {
    let (pk, sk, q) = tiny();
    let root = sk.get(&NodeId::root()).unwrap();
    assert_eq!(derive_node_key(&pk.tree, q, root, &NodeId::root()).unwrap(), *root);

    let one = derive_node_key(&pk.tree, q, root, &node("1")).unwrap();
    assert!(is_basis_of_lambda_perp(&node_matrix(&pk.tree, &node("1")).unwrap(), one.basis(), q));

    let direct = derive_node_key(&pk.tree, q, root, &node("01")).unwrap();
    let zero = derive_node_key(&pk.tree, q, root, &node("0")).unwrap();
    let chained = derive_node_key(&pk.tree, q, &zero, &node("01")).unwrap();
    let f01 = node_matrix(&pk.tree, &node("01")).unwrap();
    assert!(is_basis_of_lambda_perp(&f01, direct.basis(), q));
    assert!(is_basis_of_lambda_perp(&f01, chained.basis(), q));

    assert!(matches!(derive_node_key(&pk.tree, q, &one, &node("01")), Err(Error::NotAnAncestor { .. })));
    let mut bad = direct.basis().clone();
    bad[(0, 0)] += 1;
    assert!(matches!(NodeKey::new(&pk.tree, q, node("01"), bad), Err(Error::InvalidTrapdoor(_))));
}

#[test]
fn key_walk_covers_and_ends_empty() {
    let (pk, mut sk, q) = tiny();
    check_key(&pk, q, &sk);
    for t in 1..8 {
        sk = key_update(&pk.tree, q, sk).unwrap();
        assert_eq!(sk.period(), t);
        check_key(&pk, q, &sk);
        match t {
            1 => assert_eq!(names(&sk.node_ids()), ["001", "01", "1"]),
            2 => assert_eq!(names(&sk.node_ids()), ["01", "1"]),
            5 => assert_eq!(names(&sk.node_ids()), ["101", "11"]),
            _ => {}
        }
        assert!(matches!(sk.leaf_key(&pk.tree, q, t - 1), Err(Error::TimeMismatch { .. })));
    }
    let end = key_update(&pk.tree, q, sk).unwrap();
    assert!(end.is_expired());
    assert_eq!(end.period(), 8);
    assert!(end.node_ids().is_empty());
    let bytes = encode_secret_key(&end);
    assert_eq!(decode_secret_key(&bytes, &pk).unwrap(), end);
    assert!(matches!(key_update(&pk.tree, q, end), Err(Error::LastPeriod)));
}

#[test]
fn secret_key_files_are_checked() {
    let (pk, sk, q) = tiny();
    let sk1 = key_update(&pk.tree, q, sk.clone()).unwrap();
    let bytes = encode_secret_key(&sk1);
    assert_eq!(decode_secret_key(&bytes, &pk).unwrap(), sk1);

    // claim the period-1 node set belongs to period 2
    let mut wrong_t = bytes.clone();
    wrong_t[5..9].copy_from_slice(&2u32.to_le_bytes());
    assert!(decode_secret_key(&wrong_t, &pk).is_err());

    // corrupt one basis entry near the end of the file
    let mut corrupt = bytes.clone();
    let n = corrupt.len();
    corrupt[n - 3] ^= 0x10;
    assert!(decode_secret_key(&corrupt, &pk).is_err());
    assert!(decode_secret_key(&bytes[..n - 1], &pk).is_err());

    let nodes: Vec<NodeKey> = sk1.nodes().cloned().collect();
    assert!(SecretKey::from_parts(3, 1, nodes[..2].to_vec()).is_err());
    assert!(SecretKey::from_parts(3, 1, nodes).is_ok());
}
