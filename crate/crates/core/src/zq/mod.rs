//! Exact integer and mod-q linear algebra.

mod det;
mod echelon;
mod gso;
mod matrix;
mod modulus;

pub use det::{abs_determinant, is_basis_of_lambda_perp};
pub use echelon::{solve_particular, Echelon};
pub use gso::{gram_schmidt, GramSchmidt};
pub use matrix::{
    add_vec, add_vec_mod, concat_cols, dot_i128, mat_mul_mod, norm_sq, sub_vec, sub_vec_mod,
    uniform_below, IntMatrix, IntVector,
};
pub use modulus::{is_prime_u64, Modulus};

pub(crate) use gso::dot as dot_f64;
