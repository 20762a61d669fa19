//! Generates a lattice trapdoor, extends it to a wider matrix and samples
//! short preimages with it.
//!
//!     cargo run --release --example trapdoor_sampling

use fsbs::gaussian::GaussWidth;
use fsbs::rng::RandomSource;
use fsbs::trapdoor::{ext_basis, trap_gen, PreimageSampler};
use fsbs::zq::{concat_cols, gram_schmidt, is_basis_of_lambda_perp, norm_sq, IntMatrix, Modulus};

fn main() -> fsbs::Result<()> {
    let mut rng = RandomSource::from_seed([5; 32]);
    let q = Modulus::new(257)?;
    let (n, m) = (2, 96);

    let pair = trap_gen(n, q, m, &mut rng)?;
    println!("A is {}x{}, basis is {}x{}", n, m, pair.t.rows(), pair.t.cols());
    println!("basis of the q-ary lattice: {}", is_basis_of_lambda_perp(&pair.a, &pair.t, q));
    println!("|T~| = {:.4}, largest entry {}", pair.gs_norm, pair.t.max_abs());

    // [A | B] inherits a trapdoor of the same quality from A.
    let b = IntMatrix::uniform_mod(n, m, q, &mut rng);
    let wide = concat_cols(&[&pair.a, &b])?;
    let ext = ext_basis(&wide, (0, m), &pair.t, q)?;
    let ext_norm = gram_schmidt(&ext)?.max_norm();
    println!("extended basis {}x{}: valid {}, |T~| = {:.4}", ext.rows(), ext.cols(), is_basis_of_lambda_perp(&wide, &ext, q), ext_norm);

    let s = GaussWidth::new((pair.gs_norm * 5.0).ceil())?;
    let sampler = PreimageSampler::new(pair.a.clone(), pair.t.clone(), q)?;
    let u = vec![17, 200];
    for _ in 0..3 {
        let e = sampler.sample_isis(s, &u, &mut rng)?;
        let image = pair.a.mul_vec_mod(&e, q)?;
        println!(
            "preimage: A e = {image:?}, |e| = {:.1} (s sqrt(m) = {:.1})",
            (norm_sq(&e) as f64).sqrt(),
            s.get() * (m as f64).sqrt()
        );
    }

    let k = IntMatrix::uniform_mod(n, 4, q, &mut rng);
    let sk = sampler.sample_key(s, &k, &mut rng)?;
    println!("A S == K mod q for a 4-column K: {}", pair.a.mul_exact(&sk)?.reduce_mod(q) == k);
    Ok(())
}
