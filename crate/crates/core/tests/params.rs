//! Parameter derivation, validation and the text encoding.

use fsbs::params::{
    ball_entropy_bits, derive, min_block_width, preset, preset_spec, rejection_constant, ParamSpec, Params, Severity,
    PRESET_NAMES,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn binomial(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(53);
    let top: u64 = (x >> shift).try_into().unwrap();
    (top as f64).log2() + shift as f64
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn t1_chain_by_hand() {
    let p = derive(4, 2, 12289, 32, 8, 40.0).unwrap();
    // 6 * 4 * log2(12289) = 326.04..., gadget width 4 * 14 = 56
    assert_eq!((6.0 * 4.0 * 12289f64.log2()).ceil(), 327.0);
    assert_eq!(p.m, 336);
    assert_eq!(p.tau, 4);
    assert!(rel(p.sigma1, 33.94) < 1e-3);
    assert!(rel(p.sigma2, 2.93e6) < 5e-3);
    assert!(rel(p.sigma3, 1.12e9) < 5e-3);
    assert_eq!(p.sigma2, 12.0 * 40.0 * p.sigma1 * (1008.0f64 * 32.0).sqrt());
    let v = p.validate();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].severity, Severity::Info);
}

#[test]
fn t0_chain_by_hand() {
    let p = preset("toy-T0").unwrap();
    assert_eq!(p.m, 96);
    assert_eq!(p.sigma1, 24.0);
    let l = 3.0 * 96.0;
    assert!(rel(p.sigma2, 12.0 * 25.0 * 24.0 * (l * 16.0f64).sqrt()) < 1e-12);
    assert!(rel(p.sigma3, 12.0 * p.sigma2 * l.sqrt()) < 1e-12);
    assert!(p.validate().iter().all(|v| v.severity == Severity::Info));
    // the preset pins m = 96; derivation alone rounds 97 up to a multiple of 18
    assert_eq!(min_block_width(2, 257), 108);
    assert_eq!(min_block_width(4, 12289), 336);
}

#[test]
fn rejection_constants() {
    let m = std::f64::consts::E * (1.0f64 / 288.0).exp();
    assert!(rel(rejection_constant(), m) < 1e-15);
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        for v in [p.m1, p.m2, p.m3] {
            assert!(rel(v, m) < 1e-15);
        }
    }
}

#[test]
fn beta_formula() {
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let r = (p.total_width() as f64).sqrt();
        let want = ((2.0 * p.sigma3 + 2.0 * p.sigma * (p.kappa as f64).sqrt()) * r).max((2.0 * p.sigma3 + p.sigma2) * r);
        assert!(rel(p.beta, want) < 1e-12);
    }
}

#[test]
fn entropy_matches_exact_count() {
    let count = binomial(32, 8) << 8u32;
    assert_eq!(binomial(32, 8), BigUint::from(10_518_300u32));
    assert!((ball_entropy_bits(32, 8) - log2_big(&count)).abs() < 1e-9);
    assert!(ball_entropy_bits(32, 8) > 31.29 && ball_entropy_bits(32, 8) < 31.33);
    for (k, kappa) in [(16, 4), (64, 20), (200, 60), (8, 8), (5, 0)] {
        let exact = log2_big(&(binomial(k, kappa) << kappa as u32));
        assert!((ball_entropy_bits(k as usize, kappa as usize) - exact).abs() < 1e-9, "{k} {kappa}");
    }
}

#[test]
fn broken_sets_name_the_constraint() {
    let mut p = preset("toy-T1").unwrap();
    p.sigma1 = 10.0;
    let v = p.validate();
    assert!(v.iter().any(|v| v.severity == Severity::Error && v.constraint.starts_with("sigma1 == 12 sqrt(kappa)")));

    let err = ParamSpec { kappa: 40, ..preset_spec("toy-T1").unwrap() }.build().unwrap_err().to_string();
    assert!(err.contains("1 <= kappa <= k"), "{err}");
    let err = ParamSpec { q: 12288, ..preset_spec("toy-T1").unwrap() }.build().unwrap_err().to_string();
    assert!(err.contains("q is an odd prime"), "{err}");
    let err = ParamSpec { gamma: Some(40), ..preset_spec("toy-T1").unwrap() }.build().unwrap_err().to_string();
    assert!(err.contains("2^gamma"), "{err}");
}

#[test]
fn column_floor_can_fail() {
    // one tiny block at a wide modulus cannot clear the 64-column floor
    let err = ParamSpec { n: 1, ell: 0, q: 65521, k: 8, kappa: 2, sigma: 2.0, m: Some(60), gamma: None }
        .build()
        .unwrap_err()
        .to_string();
    assert!(err.contains("64 + n log q"), "{err}");
    assert!(derive(1, 2, 65521, 8, 2, 2.0).is_ok());
}

#[test]
fn single_period() {
    let p = derive(2, 0, 257, 16, 4, 25.0).unwrap();
    assert_eq!(p.tau, 1);
    assert_eq!(p.total_width(), p.m);
}

#[test]
fn text_encoding() {
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let text = p.to_text();
        assert_eq!(Params::from_text(&text).unwrap(), p);
        assert_eq!(Params::from_text(&text).unwrap().to_text(), text);
    }
    let text = preset("toy-T0").unwrap().to_text();
    assert!(Params::from_text(&format!("{text}extra=1\n")).is_err());
    assert!(Params::from_text(&format!("{text}n=3\n")).is_err());
    assert!(Params::from_text(&text.replace("q=257", "q=abc")).is_err());
    assert!(Params::from_text("garbage").is_err());
}

proptest! {
    #[test]
    fn deeper_trees_never_shrink_widths(n in 1usize..4, k in 8usize..40, kappa in 1usize..8, sigma in 2.0f64..60.0) {
        let q = 257;
        let mut prev: Option<Params> = None;
        for ell in 0..10u8 {
            let p = ParamSpec { n, ell, q, k, kappa, sigma, m: None, gamma: None }.derive_unchecked().unwrap();
            if let Some(o) = &prev {
                prop_assert!(p.sigma2 >= o.sigma2 && p.sigma3 >= o.sigma3 && p.beta >= o.beta);
            }
            prev = Some(p);
        }
    }

    #[test]
    fn derived_sets_only_carry_notes(n in 1usize..5, ell in 0u8..6, qi in 0usize..4, kappa in 1usize..8, sigma in 2.0f64..60.0) {
        let q = [257u64, 3329, 7681, 12289][qi];
        let p = derive(n, ell, q, 32, kappa, sigma);
        if let Ok(p) = p {
            prop_assert!(p.validate().iter().all(|v| v.severity == Severity::Info));
            prop_assert!(p.m >= min_block_width(n, q));
        }
    }
}
