//! Exact linear algebra against schoolbook, rational and fraction-free oracles.

use fsbs::rng::RandomSource;
use fsbs::trapdoor::trap_gen;
use fsbs::zq::{
    abs_determinant, concat_cols, gram_schmidt, is_basis_of_lambda_perp, mat_mul_mod, solve_particular, IntMatrix,
    Modulus,
};
use fsbs::Error;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use rand_core::RngCore;

fn schoolbook_mod(a: &IntMatrix, b: &IntMatrix, q: u64) -> Vec<Vec<i64>> {
    let q = q as i128;
    (0..a.rows())
        .map(|i| {
            (0..b.cols())
                .map(|j| {
                    let mut acc = 0i128;
                    for k in 0..a.cols() {
                        acc += a[(i, k)] as i128 * b[(k, j)] as i128;
                    }
                    acc.rem_euclid(q) as i64
                })
                .collect()
        })
        .collect()
}

fn rows_of(m: &IntMatrix) -> Vec<Vec<i64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Fraction-free Bareiss elimination over `BigInt`.
fn bareiss_det(m: &IntMatrix) -> BigInt {
    let n = m.rows();
    let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| m.row(i).iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    a[n - 1][n - 1].clone() * sign
}

/// Exact rational Gram-Schmidt; returns the squared norms.
fn rational_gs_norms_sq(m: &IntMatrix) -> Vec<BigRational> {
    let n = m.rows();
    let cols: Vec<Vec<BigRational>> =
        (0..n).map(|j| (0..n).map(|i| BigRational::from_integer(m[(i, j)].into())).collect()).collect();
    let dot = |x: &[BigRational], y: &[BigRational]| x.iter().zip(y).fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
    let mut ortho: Vec<Vec<BigRational>> = Vec::new();
    let mut norms = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for (b, nb) in ortho.iter().zip(&norms) {
            let mu = dot(&c, b) / nb;
            for (x, y) in v.iter_mut().zip(b) {
                *x -= &mu * y;
            }
        }
        norms.push(dot(&v, &v));
        ortho.push(v);
    }
    norms
}

fn random_matrix(rows: usize, cols: usize, bound: i64, rng: &mut RandomSource) -> IntMatrix {
    IntMatrix::from_fn(rows, cols, |_, _| (rng.next_u64() % (2 * bound as u64 + 1)) as i64 - bound)
}

#[test]
fn mat_mul_mod_small_cases() {
    let q7 = Modulus::new(7).unwrap();
    let b = IntMatrix::from_rows(&[[9, -3], [4, 15]]);
    assert_eq!(mat_mul_mod(&IntMatrix::identity(2), &b, q7).unwrap(), b.reduce_mod(q7));
    let q5 = Modulus::new(5).unwrap();
    let a = IntMatrix::from_rows(&[[1, 2], [3, 4]]);
    let ones = IntMatrix::from_rows(&[[1], [1]]);
    assert_eq!(mat_mul_mod(&a, &ones, q5).unwrap(), IntMatrix::from_rows(&[[3], [2]]));
    assert!(matches!(mat_mul_mod(&a, &IntMatrix::identity(3), q5), Err(Error::DimensionMismatch(_))));
}

#[test]
fn mat_mul_mod_matches_schoolbook_at_scale() {
    let q = Modulus::new(12289).unwrap();
    let mut rng = RandomSource::from_seed([1; 32]);
    let a = IntMatrix::uniform_mod(4, 480, q, &mut rng);
    let b = IntMatrix::uniform_mod(480, 32, q, &mut rng);
    assert_eq!(rows_of(&mat_mul_mod(&a, &b, q).unwrap()), schoolbook_mod(&a, &b, 12289));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mat_mul_mod_oracle(r in 1usize..=64, k in 1usize..=64, c in 1usize..=64, seed in any::<[u8; 32]>()) {
        let q = Modulus::new(257).unwrap();
        let mut rng = RandomSource::from_seed(seed);
        let a = random_matrix(r, k, 1 << 40, &mut rng);
        let b = random_matrix(k, c, 1 << 20, &mut rng);
        let got = mat_mul_mod(&a, &b, q).unwrap();
        prop_assert!(got.as_slice().iter().all(|&x| (0..257).contains(&x)));
        prop_assert_eq!(rows_of(&got), schoolbook_mod(&a, &b, 257));
    }

    #[test]
    fn row_permutation_keeps_gs_norms(n in 2usize..=10, seed in any::<[u8; 32]>()) {
        let mut rng = RandomSource::from_seed(seed);
        let b = IntMatrix::from_fn(n, n, |i, j| if i == j { 5 + (rng.next_u64() % 5) as i64 } else { (rng.next_u64() % 7) as i64 - 3 });
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
        }
        let g1 = gram_schmidt(&b).unwrap();
        let g2 = gram_schmidt(&b.permute_rows(&perm).unwrap()).unwrap();
        for (x, y) in g1.norms.iter().zip(&g2.norms) {
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn determinant_matches_bareiss(n in 1usize..=12, bound in 1i64..=50, seed in any::<[u8; 32]>()) {
        let mut rng = RandomSource::from_seed(seed);
        let m = random_matrix(n, n, bound, &mut rng);
        prop_assert_eq!(abs_determinant(&m), bareiss_det(&m).abs().to_biguint().unwrap());
    }
}

#[test]
fn solve_particular_cases() {
    let q5 = Modulus::new(5).unwrap();
    assert_eq!(solve_particular(&IntMatrix::identity(2), &[3, 4], q5).unwrap(), vec![3, 4]);
    let t = solve_particular(&IntMatrix::from_rows(&[[2, 4]]), &[1], q5).unwrap();
    assert_eq!(t, vec![3, 0]);
    assert_eq!((2 * t[0] + 4 * t[1]) % 5, 1);
    let deficient = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
    assert_eq!(solve_particular(&deficient, &[1, 1], q5), Err(Error::NoSolutionOrRankDeficient));

    let q = Modulus::new(257).unwrap();
    let mut rng = RandomSource::from_seed([2; 32]);
    for _ in 0..50 {
        let a = IntMatrix::uniform_mod(4, 96, q, &mut rng);
        let u: Vec<i64> = (0..4).map(|_| (rng.next_u64() % 257) as i64).collect();
        let t = solve_particular(&a, &u, q).unwrap();
        assert!(t.iter().all(|&x| (0..257).contains(&x)));
        assert_eq!(a.mul_vec_mod(&t, q).unwrap(), u);
        assert_eq!(solve_particular(&a, &u, q).unwrap(), t);
    }
}

#[test]
fn gram_schmidt_small_cases() {
    let g = gram_schmidt(&IntMatrix::identity(4).scale(3).unwrap()).unwrap();
    assert_eq!(g.norms, vec![3.0; 4]);
    let g = gram_schmidt(&IntMatrix::from_rows(&[[1, 1], [0, 1]])).unwrap();
    assert_eq!(g.vectors, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert_eq!(g.norms, vec![1.0, 1.0]);
    let singular = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
    assert!(matches!(gram_schmidt(&singular), Err(Error::DegenerateBasis(_))));
}

#[test]
fn gram_schmidt_matches_rational_oracle() {
    let mut rng = RandomSource::from_seed([3; 32]);
    for _ in 0..20 {
        let b = IntMatrix::from_fn(8, 8, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => (rng.next_u64() % 41) as i64 - 20,
            std::cmp::Ordering::Less => 0,
        });
        let g = gram_schmidt(&b).unwrap();
        for (x, exact) in g.norms.iter().zip(rational_gs_norms_sq(&b)) {
            let want = exact.to_f64().unwrap().sqrt();
            assert!((x - want).abs() <= 1e-9 * want, "{x} vs {want}");
        }
    }
}

#[test]
fn gram_schmidt_reconstructs_basis() {
    let mut rng = RandomSource::from_seed([4; 32]);
    let pair = trap_gen(2, Modulus::new(257).unwrap(), 96, &mut rng).unwrap();
    for b in [pair.t, random_matrix(30, 30, 100, &mut rng)] {
        let g = gram_schmidt(&b).unwrap();
        let m = b.rows();
        let scale = b.max_abs() as f64;
        for j in 0..m {
            assert_eq!(g.coefficient(j, j), 1.0);
            for i in 0..m {
                let rebuilt: f64 = (0..=j).map(|k| g.coefficient(k, j) * g.vectors[k][i]).sum();
                assert!((rebuilt - b[(i, j)] as f64).abs() <= 1e-8 * scale, "entry ({i}, {j})");
            }
        }
    }
}

#[test]
fn lattice_basis_check_cases() {
    let q5 = Modulus::new(5).unwrap();
    let a = IntMatrix::from_rows(&[[1, 0]]);
    assert!(is_basis_of_lambda_perp(&a, &IntMatrix::from_rows(&[[5, 0], [0, 1]]), q5));
    assert!(!is_basis_of_lambda_perp(&a, &IntMatrix::from_rows(&[[5, 0], [0, 5]]), q5));
    assert!(!is_basis_of_lambda_perp(&a, &IntMatrix::from_rows(&[[1, 0], [0, 1]]), q5));

    let q = Modulus::new(257).unwrap();
    let pair = trap_gen(2, q, 96, &mut RandomSource::from_seed([5; 32])).unwrap();
    assert!(is_basis_of_lambda_perp(&pair.a, &pair.t, q));
    assert_eq!(bareiss_det(&pair.t).abs().to_biguint().unwrap(), BigUint::from(257u32).pow(2));
    let mut broken = pair.t.clone();
    broken[(0, 0)] += 257;
    assert!(!is_basis_of_lambda_perp(&pair.a, &broken, q));
}

#[test]
fn permutation_and_concatenation() {
    let b = IntMatrix::from_rows(&[[1, 2, 3], [4, 5, 6]]);
    assert_eq!(b.permute_rows(&[0, 1]).unwrap(), b);
    assert_eq!(b.permute_rows(&[1, 0]).unwrap(), IntMatrix::from_rows(&[[4, 5, 6], [1, 2, 3]]));
    assert!(b.permute_rows(&[0, 0]).is_err());
    let i2 = IntMatrix::identity(2);
    let got = concat_cols(&[&i2, &i2.scale(2).unwrap()]).unwrap();
    assert_eq!(got, IntMatrix::from_rows(&[[1, 0, 2, 0], [0, 1, 0, 2]]));
    assert!(concat_cols(&[&i2, &IntMatrix::identity(3)]).is_err());
}

#[test]
fn modulus_rejects_non_primes() {
    for q in [0, 1, 2, 4, 9, 15, 12287, 1 << 62] {
        assert!(matches!(Modulus::new(q), Err(Error::InvalidModulus(_))), "{q}");
    }
    for q in [3, 17, 257, 12289, (1 << 61) - 1] {
        assert_eq!(Modulus::new(q).unwrap().value(), q);
    }
}

#[test]
fn overflow_fails_loudly() {
    let big = IntMatrix::from_rows(&[[i64::MAX, i64::MAX]]);
    let col = IntMatrix::from_rows(&[[i64::MAX], [i64::MAX]]);
    assert!(matches!(big.mul_exact(&col), Err(Error::Overflow(_))));
}
