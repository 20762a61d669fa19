//! Draws from the integer discrete Gaussian and from a 2-dimensional lattice
//! Gaussian, and compares the empirical frequencies with the exact ones.
//!
//!     cargo run --release --example gaussian_sampling

use std::collections::BTreeMap;

use fsbs::gaussian::{sample_d, sample_z, GaussWidth};
use fsbs::rng::RandomSource;
use fsbs::zq::IntMatrix;

fn main() -> fsbs::Result<()> {
    let mut rng = RandomSource::from_seed([9; 32]);
    let draws = 200_000;

    let s = GaussWidth::new(4.0)?;
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for _ in 0..draws {
        *counts.entry(sample_z(s, 0.0, &mut rng)).or_default() += 1;
    }
    let rho = |x: f64| (-std::f64::consts::PI * x * x / 16.0).exp();
    let total: f64 = (-60..=60).map(|x| rho(x as f64)).sum();
    println!("D_Z,4:   x   observed   exact");
    for x in -4..=4 {
        let obs = counts.get(&x).copied().unwrap_or(0) as f64 / draws as f64;
        println!("       {x:>3}   {obs:.5}    {:.5}", rho(x as f64) / total);
    }

    // lattice generated by the columns (2, 0) and (1, 2)
    let basis = IntMatrix::from_rows(&[[2, 1], [0, 2]]);
    let s = GaussWidth::new(6.0)?;
    let mut points: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for _ in 0..draws / 4 {
        let v = sample_d(&basis, s, &[0.0, 0.0], &mut rng)?;
        *points.entry((v[0], v[1])).or_default() += 1;
    }
    let mut top: Vec<_> = points.into_iter().collect();
    top.sort_by_key(|p| std::cmp::Reverse(p.1));
    println!("most frequent lattice points at s = 6:");
    for ((x, y), c) in top.iter().take(5) {
        println!("  ({x:>2}, {y:>2})  {c}");
    }
    Ok(())
}
