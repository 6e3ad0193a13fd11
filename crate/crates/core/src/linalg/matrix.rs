//! Dense integer and rational matrices with arbitrary-precision entries.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix stored row-major.
///
/// Zero-sized dimensions are allowed so that e.g. the generator matrix of the
/// zero sublattice can be represented without special cases.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

/// Dense rational matrix stored row-major. Entries are kept in lowest terms
/// with positive denominators by `BigRational` itself.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl IntMat {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(IntMat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn scalar(n: usize, s: impl Into<BigInt>) -> Self {
        let s = s.into();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s.clone();
        }
        m
    }

    pub fn diag<T: Into<BigInt> + Clone>(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone().into();
        }
        m
    }

    /// Builds a matrix from small integer rows. Panics on ragged input, so it
    /// is meant for literals in code and tests.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        Self::try_from_rows(rows.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect())
            .expect("ragged matrix literal")
    }

    pub fn try_from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("rows of unequal length".into()));
        }
        Ok(IntMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Column matrix from a vector.
    pub fn column(v: &[BigInt]) -> Self {
        IntMat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMat) -> Result<IntMat> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, rhs: &IntMat) -> Result<IntMat> {
        self.same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(IntMat { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, rhs: &IntMat) -> Result<IntMat> {
        self.same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(IntMat { rows: self.rows, cols: self.cols, data })
    }

    pub fn neg(&self) -> IntMat {
        IntMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, s: &BigInt) -> IntMat {
        IntMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Nonnegative integer power of a square matrix.
    pub fn pow(&self, mut e: u64) -> Result<IntMat> {
        self.require_square()?;
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Inverse of a matrix with determinant ±1; `None` otherwise.
    pub fn inverse_unimodular(&self) -> Option<IntMat> {
        let inv = self.to_rat().inverse()?;
        inv.to_int()
    }

    pub fn to_rat(&self) -> RatMat {
        RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
    }

    /// Gcd of all entries (zero for the zero matrix).
    pub fn content(&self) -> BigInt {
        self.data.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += factor * row[src]
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * factor;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += factor * col[src]
    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * factor;
            self.data[i * self.cols + dst] += v;
        }
    }

    pub(crate) fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -&self.data[r * self.cols + j];
            self.data[r * self.cols + j] = v;
        }
    }

    /// Replaces rows (a, b) by (p·a + q·b, r·a + s·b).
    pub(crate) fn combine_rows(&mut self, a: usize, b: usize, coef: [&BigInt; 4]) {
        let [p, q, r, s] = coef;
        for j in 0..self.cols {
            let x = self.data[a * self.cols + j].clone();
            let y = self.data[b * self.cols + j].clone();
            self.data[a * self.cols + j] = p * &x + q * &y;
            self.data[b * self.cols + j] = r * &x + s * &y;
        }
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    fn same_shape(&self, rhs: &IntMat) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl RatMat {
    pub fn new(rows: usize, cols: usize, data: Vec<BigRational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(RatMat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        IntMat::identity(n).to_rat()
    }

    pub fn try_from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("rows of unequal length".into()));
        }
        Ok(RatMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix from `(numerator, denominator)` literals.
    pub fn from_fracs(rows: &[Vec<(i64, i64)>]) -> Self {
        Self::try_from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
                        .collect()
                })
                .collect(),
        )
        .expect("ragged matrix literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(BigRational::is_integer)
    }

    pub fn is_identity(&self) -> bool {
        self.to_int().is_some_and(|m| m.is_identity())
    }

    /// The integer matrix with the same entries, if all entries are integers.
    pub fn to_int(&self) -> Option<IntMat> {
        if !self.is_integral() {
            return None;
        }
        Some(IntMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.to_integer()).collect(),
        })
    }

    /// Least common multiple of the entry denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
    }

    /// Returns `(d, N)` with `self = N / d`, `N` integral and `d > 0` minimal.
    pub fn clear_denominators(&self) -> (BigInt, IntMat) {
        let d = self.common_denominator();
        let data = self.data.iter().map(|x| (x * &d).to_integer()).collect();
        (d, IntMat { rows: self.rows, cols: self.cols, data })
    }

    pub fn mul(&self, rhs: &RatMat) -> Result<RatMat> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_int(&self, rhs: &IntMat) -> Result<RatMat> {
        self.mul(&rhs.to_rat())
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigRational>> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * BigRational::from_integer(v[j].clone()))
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect())
    }

    pub fn sub(&self, rhs: &RatMat) -> Result<RatMat> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(RatMat { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: &BigRational) -> RatMat {
        RatMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Gauss-Jordan inverse over the rationals; `None` when singular or not square.
    pub fn inverse(&self) -> Option<RatMat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = &f * &a[(col, j)];
                    a[(r, j)] -= t;
                    let t = &f * &inv[(col, j)];
                    inv[(r, j)] -= t;
                }
            }
        }
        Some(inv)
    }
}

impl Index<(usize, usize)> for RatMat {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl From<&IntMat> for RatMat {
    fn from(m: &IntMat) -> Self {
        m.to_rat()
    }
}

fn write_rows<T: fmt::Display>(f: &mut fmt::Formatter<'_>, rows: usize, cols: usize, data: &[T]) -> fmt::Result {
    write!(f, "[")?;
    for i in 0..rows {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "[")?;
        for j in 0..cols {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", data[i * cols + j])?;
        }
        write!(f, "]")?;
    }
    write!(f, "]")
}

/// Prints as a bracketed row list, `[[a, b], [c, d]]`.
impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rows(f, self.rows, self.cols, &self.data)
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Prints as a bracketed row list with `p/q` entries.
impl fmt::Display for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rows(f, self.rows, self.cols, &self.data)
    }
}

impl fmt::Debug for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiply_and_power() {
        let m = IntMat::from_rows(&[vec![2, 1], vec![1, 1]]);
        let m2 = m.mul(&m).unwrap();
        assert_eq!(m2, IntMat::from_rows(&[vec![5, 3], vec![3, 2]]));
        assert_eq!(m.pow(2).unwrap(), m2);
        assert!(m.pow(0).unwrap().is_identity());
    }

    #[test]
    fn unimodular_inverse() {
        let m = IntMat::from_rows(&[vec![2, 1], vec![1, 1]]);
        let inv = m.inverse_unimodular().unwrap();
        assert_eq!(inv, IntMat::from_rows(&[vec![1, -1], vec![-1, 2]]));
        assert!(IntMat::diag(&[2, 1]).inverse_unimodular().is_none());
    }

    #[test]
    fn rational_display_and_clearing() {
        let r = RatMat::from_fracs(&[vec![(1, 2), (3, 1)], vec![(0, 1), (-2, 3)]]);
        assert_eq!(r.to_string(), "[[1/2, 3], [0, -2/3]]");
        let (d, n) = r.clear_denominators();
        assert_eq!(d, BigInt::from(6));
        assert_eq!(n, IntMat::from_rows(&[vec![3, 18], vec![0, -4]]));
        assert!(r.to_int().is_none());
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![BigInt::one()], vec![BigInt::one(), BigInt::zero()]];
        assert!(IntMat::try_from_rows(rows).is_err());
        assert!(IntMat::new(2, 2, vec![BigInt::one(); 3]).is_err());
    }
}
