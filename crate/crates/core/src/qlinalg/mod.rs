//! Exact rational linear algebra.

mod exppoly;
mod matrix;
mod poly;
mod subspace;

pub type Rational = num_rational::BigRational;

pub use exppoly::{closed_form, dominance, iterate_functional, ExpPoly, ExpTerm};
pub use matrix::{
    clear_denominators, dot, int_vec_to_rat, is_zero_vec, lcm_denominators, null_space,
    primitive_integer, rat, rat_vec, rref, solve, QMatrix,
};
pub use poly::{
    char_poly, char_poly_monic, generalized_eigenspace, rational_roots,
    rational_spectrum, IntPoly, RationalRoots, Side,
};
pub use subspace::Subspace;
