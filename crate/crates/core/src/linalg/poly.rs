//! Integer polynomials: characteristic polynomials, cyclotomic trial division
//! and Sturm-sequence root counting.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use super::matrix::IntMat;
use crate::error::{Error, Result};

/// Polynomial with integer coefficients, lowest degree first. The zero
/// polynomial has no coefficients; otherwise the last one is nonzero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `x^n - 1`
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = BigInt::from(-1);
        c[n] = BigInt::one();
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn mul(&self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Division by a monic polynomial: `(q, r)` with `self = q·d + r`, `deg r < deg d`.
    pub fn divrem_monic(&self, d: &IntPoly) -> (IntPoly, IntPoly) {
        assert!(d.is_monic(), "divisor must be monic");
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (IntPoly::zero(), self.clone());
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            q[k] = c;
        }
        r.truncate(dd);
        (IntPoly::new(q), IntPoly::new(r))
    }

    pub fn is_divisible_by_monic(&self, d: &IntPoly) -> bool {
        self.divrem_monic(d).1.is_zero()
    }

    fn to_rat(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Monic characteristic polynomial `det(x·I − A)`, computed with Berkowitz's
/// division-free recursion.
pub fn char_poly(a: &IntMat) -> Result<IntPoly> {
    a.require_square()?;
    let mut high_first = berkowitz(a);
    high_first.reverse();
    Ok(IntPoly::new(high_first))
}

/// Coefficients of `det(xI − A)`, highest degree first.
fn berkowitz(a: &IntMat) -> Vec<BigInt> {
    let n = a.rows();
    match n {
        0 => return vec![BigInt::one()],
        1 => return vec![BigInt::one(), -a[(0, 0)].clone()],
        _ => {}
    }
    let row: Vec<BigInt> = (1..n).map(|j| a[(0, j)].clone()).collect();
    let mut col: Vec<BigInt> = (1..n).map(|i| a[(i, 0)].clone()).collect();
    let sub_rows: Vec<Vec<BigInt>> = (1..n).map(|i| (1..n).map(|j| a[(i, j)].clone()).collect()).collect();
    let sub = IntMat::try_from_rows(sub_rows).expect("square submatrix");

    // first column of the Toeplitz factor: 1, -a00, -R·C, -R·S·C, ...
    let mut toeplitz = Vec::with_capacity(n + 1);
    toeplitz.push(BigInt::one());
    toeplitz.push(-a[(0, 0)].clone());
    for k in 0..n - 1 {
        if k > 0 {
            col = sub.mul_vec(&col).expect("matching sizes");
        }
        let rc: BigInt = row.iter().zip(&col).map(|(r, c)| r * c).sum();
        toeplitz.push(-rc);
    }
    let inner = berkowitz(&sub);
    (0..=n)
        .map(|i| (0..n.min(i + 1)).map(|j| &toeplitz[i - j] * &inner[j]).sum())
        .collect()
}

fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// `Φ_1, …, Φ_max` (index 0 unused).
pub fn cyclotomic_polynomials(max: usize) -> Vec<IntPoly> {
    let mut phis = vec![IntPoly::zero(); max + 1];
    for d in 1..=max {
        let mut p = IntPoly::x_pow_minus_one(d);
        for e in (1..d).filter(|e| d % e == 0) {
            let (q, r) = p.divrem_monic(&phis[e]);
            debug_assert!(r.is_zero());
            p = q;
        }
        phis[d] = p;
    }
    phis
}

pub fn cyclotomic(d: usize) -> IntPoly {
    cyclotomic_polynomials(d).swap_remove(d)
}

/// All orders `d` with `Φ_d | p`. Candidates run over `d ≤ 2·deg²`, which
/// covers every `d` with `φ(d) ≤ deg` because `φ(d) ≥ √(d/2)`.
pub fn cyclotomic_divisors(p: &IntPoly) -> Result<BTreeSet<u64>> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)? as u64;
    let bound = 2 * deg * deg;
    let phis = cyclotomic_polynomials(bound as usize);
    Ok((1..=bound)
        .filter(|&d| euler_phi(d) <= deg && p.is_divisible_by_monic(&phis[d as usize]))
        .collect())
}

/// Polynomial over the rationals; only used for gcds and Sturm chains.
#[derive(Clone, Debug, PartialEq)]
struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    fn divrem(&self, d: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!d.is_zero());
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (RatPoly::new(vec![]), self.clone());
        }
        let lead = d.coeffs[dd].clone();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            q[k] = c;
        }
        r.truncate(dd);
        (RatPoly::new(q), RatPoly::new(r))
    }

    fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = std::mem::replace(&mut b, r);
        }
        a
    }

    fn neg(&self) -> RatPoly {
        RatPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    fn sign_at_zero(&self) -> i8 {
        sign(self.coeffs.first())
    }

    fn sign_at_pos_inf(&self) -> i8 {
        sign(self.coeffs.last())
    }

    fn sign_at_neg_inf(&self) -> i8 {
        let s = self.sign_at_pos_inf();
        if self.degree() % 2 == 1 {
            -s
        } else {
            s
        }
    }
}

fn sign(c: Option<&BigRational>) -> i8 {
    match c {
        Some(c) if c.is_positive() => 1,
        Some(c) if c.is_negative() => -1,
        _ => 0,
    }
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let nz: Vec<i8> = signs.filter(|&s| s != 0).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

fn squarefree_part(p: &RatPoly) -> RatPoly {
    let g = p.gcd(&p.derivative());
    p.divrem(&g).0
}

fn sturm_chain(p: &RatPoly) -> Vec<RatPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    while !chain.last().unwrap().is_zero() {
        let n = chain.len();
        let r = chain[n - 2].divrem(&chain[n - 1]).1.neg();
        chain.push(r);
    }
    chain.pop();
    chain
}

/// Number of distinct real roots.
pub fn count_real_roots(p: &IntPoly) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let chain = sturm_chain(&squarefree_part(&p.to_rat()));
    sign_changes(chain.iter().map(RatPoly::sign_at_neg_inf)) - sign_changes(chain.iter().map(RatPoly::sign_at_pos_inf))
}

/// Number of distinct real roots in `(0, ∞)`.
pub fn count_positive_roots(p: &IntPoly) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let mut q = p.to_rat();
    // strip roots at zero so that 0 is not a root of the chain head
    while q.coeffs.first().is_some_and(Zero::is_zero) {
        q.coeffs.remove(0);
    }
    if q.degree() == 0 {
        return 0;
    }
    let chain = sturm_chain(&squarefree_part(&q));
    sign_changes(chain.iter().map(RatPoly::sign_at_zero)) - sign_changes(chain.iter().map(RatPoly::sign_at_pos_inf))
}

/// Whether every complex root (with multiplicity) is a strictly positive real.
pub fn all_roots_positive_real(p: &IntPoly) -> bool {
    let Some(deg) = p.degree() else { return false };
    if deg == 0 {
        return true;
    }
    if p.coeffs[0].is_zero() {
        return false;
    }
    let sf = squarefree_part(&p.to_rat());
    count_positive_roots(p) == sf.degree()
}
