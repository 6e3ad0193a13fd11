//! Hermite and Smith normal forms over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMat;

/// `(g, x, y)` with `x·a + y·b = g`.
pub(crate) fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let nr = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, nr);
        let ns = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, ns);
        let nt = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, nt);
    }
    (old_r, old_s, old_t)
}

/// Row-style Hermite normal form: returns `(R, W)` with `W·A = R`, `W`
/// unimodular, pivots positive with strictly increasing columns, entries
/// above each pivot reduced into `[0, pivot)`, zero rows last.
pub fn row_hermite_normal_form(a: &IntMat) -> (IntMat, IntMat) {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut w = IntMat::identity(m);
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        for i in row + 1..m {
            if r[(i, col)].is_zero() {
                continue;
            }
            let (p, b) = (r[(row, col)].clone(), r[(i, col)].clone());
            let (g, x, y) = ext_gcd(&p, &b);
            let (pg, bg) = (&p / &g, &b / &g);
            let nb = -bg;
            r.combine_rows(row, i, [&x, &y, &nb, &pg]);
            w.combine_rows(row, i, [&x, &y, &nb, &pg]);
        }
        if r[(row, col)].is_zero() {
            continue;
        }
        if r[(row, col)].is_negative() {
            r.negate_row(row);
            w.negate_row(row);
        }
        let pivot = r[(row, col)].clone();
        for i in 0..row {
            let q = -r[(i, col)].div_floor(&pivot);
            r.add_row_multiple(i, row, &q);
            w.add_row_multiple(i, row, &q);
        }
        row += 1;
    }
    (r, w)
}

/// Column-style Hermite normal form: `(H, U)` with `H = A·U`, `U`
/// unimodular. The nonzero columns of `H` come first, each has a positive
/// pivot (its first nonzero entry) in a strictly lower row than the previous
/// column, and the entries to the left of a pivot lie in `[0, pivot)`.
///
/// Two matrices generate the same lattice exactly when their column HNFs
/// agree.
pub fn hermite_normal_form(a: &IntMat) -> (IntMat, IntMat) {
    let (r, w) = row_hermite_normal_form(&a.transpose());
    (r.transpose(), w.transpose())
}

/// Rank of an integer matrix (number of nonzero rows of its row HNF).
pub fn rank(a: &IntMat) -> usize {
    let (r, _) = row_hermite_normal_form(a);
    (0..r.rows()).filter(|&i| r.row(i).iter().any(|x| !x.is_zero())).count()
}

/// `U·A·V = D` with `U`, `V` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub d: IntMat,
    pub u: IntMat,
    pub v: IntMat,
}

impl SmithForm {
    /// The diagonal `d_1 | d_2 | … | d_min(m,n)`, zeros last.
    pub fn invariants(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariants().iter().filter(|x| !x.is_zero()).count()
    }
}

pub fn smith_normal_form(a: &IntMat) -> SmithForm {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMat::identity(m);
    let mut v = IntMat::identity(n);
    for t in 0..m.min(n) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let best = (t..m)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !d[(i, j)].is_zero())
                .min_by(|&x, &y| d[x].abs().cmp(&d[y].abs()));
            let Some((pi, pj)) = best else {
                return SmithForm { d, u, v };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m {
                let q = -(&d[(i, t)] / &pivot);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = -(&d[(t, j)] / &pivot);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&d[(i, j)] % &pivot).is_zero()));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { d, u, v }
}

/// Order of `Z^n / A·Z^n`; `None` when infinite.
pub fn cokernel_order(a: &IntMat) -> crate::error::Result<Option<BigInt>> {
    a.require_square()?;
    let s = smith_normal_form(a);
    let inv = s.invariants();
    if inv.iter().any(Zero::is_zero) {
        return Ok(None);
    }
    Ok(Some(inv.iter().product()))
}
