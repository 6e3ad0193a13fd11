//! Fraction-free determinants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use super::matrix::{IntMat, RatMat};
use crate::error::Result;

/// Bareiss elimination: every intermediate pivot division is exact.
pub fn det_int(a: &IntMat) -> Result<BigInt> {
    a.require_square()?;
    let n = a.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            match (k + 1..n).find(|&r| !m[(r, k)].is_zero()) {
                Some(r) => {
                    m.swap_rows(k, r);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                m[(i, j)] = v;
            }
        }
        prev = m[(k, k)].clone();
    }
    Ok(sign * &m[(n - 1, n - 1)])
}

/// Rational determinant via `det(N)/d^n` with `N = d·A` integral.
pub fn det_rat(a: &RatMat) -> Result<BigRational> {
    let (d, n) = a.clear_denominators();
    let det = det_int(&n)?;
    let scale: BigInt = Pow::pow(&d, a.rows());
    Ok(BigRational::new(det, scale))
}

impl IntMat {
    pub fn determinant(&self) -> Result<BigInt> {
        det_int(self)
    }
}

impl RatMat {
    pub fn determinant(&self) -> Result<BigRational> {
        det_rat(self)
    }
}
