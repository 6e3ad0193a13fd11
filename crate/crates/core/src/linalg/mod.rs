//! Exact integer and rational linear algebra.

mod det;
mod lattice;
mod matrix;
mod normal_form;
mod poly;

pub use det::{det_int, det_rat};
pub use lattice::{LatticeIndex, Sublattice};
pub use matrix::{IntMat, RatMat};
pub use normal_form::{cokernel_order, hermite_normal_form, rank, row_hermite_normal_form, smith_normal_form, SmithForm};
pub use poly::{
    all_roots_positive_real, char_poly, count_positive_roots, count_real_roots, cyclotomic, cyclotomic_divisors,
    cyclotomic_polynomials, IntPoly,
};
