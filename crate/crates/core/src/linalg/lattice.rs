//! Sublattices of `Z^k` in canonical column Hermite form.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMat;
use super::normal_form::{hermite_normal_form, smith_normal_form};
use crate::error::{Error, Result};

/// A subgroup of `Z^k`, stored by its column-HNF basis (nonzero columns only).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sublattice {
    ambient: usize,
    basis: IntMat,
}

/// Index of one lattice in another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeIndex {
    Finite(BigInt),
    Infinite,
}

impl LatticeIndex {
    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            LatticeIndex::Finite(n) => Some(n),
            LatticeIndex::Infinite => None,
        }
    }
}

impl Sublattice {
    /// The lattice spanned by the columns of `generators`.
    pub fn spanned_by(generators: &IntMat) -> Self {
        let (h, _) = hermite_normal_form(generators);
        let r = (0..h.cols()).take_while(|&j| h.col(j).iter().any(|x| !x.is_zero())).count();
        let cols: Vec<Vec<BigInt>> = (0..r).map(|j| h.col(j)).collect();
        Sublattice { ambient: generators.rows(), basis: IntMat::from_columns(generators.rows(), &cols) }
    }

    pub fn full(k: usize) -> Self {
        Sublattice { ambient: k, basis: IntMat::identity(k) }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &IntMat {
        &self.basis
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Integer coordinates of `v` in the canonical basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        if v.len() != self.ambient {
            return None;
        }
        // forward substitution on the pivot rows of the echelon basis
        let mut rest = v.to_vec();
        let mut coords = Vec::with_capacity(self.rank());
        for j in 0..self.rank() {
            let col = self.basis.col(j);
            let p = col.iter().position(|x| !x.is_zero()).expect("basis column is nonzero");
            if rest[..p].iter().any(|x| !x.is_zero()) {
                return None;
            }
            if !(&rest[p] % &col[p]).is_zero() {
                return None;
            }
            let c = &rest[p] / &col[p];
            for (r, b) in rest.iter_mut().zip(&col) {
                *r -= &c * b;
            }
            coords.push(c);
        }
        rest.iter().all(Zero::is_zero).then_some(coords)
    }

    pub fn is_subset_of(&self, other: &Sublattice) -> bool {
        self.ambient == other.ambient && (0..self.rank()).all(|j| other.contains(&self.basis.col(j)))
    }

    /// `{v : ℓ·v ∈ L for some ℓ > 0}`.
    pub fn saturate(&self) -> Sublattice {
        if self.rank() == 0 {
            return self.clone();
        }
        let s = smith_normal_form(&self.basis);
        // L = U^{-1}·D·Z^r, so its saturation is spanned by the first r columns of U^{-1}
        let u_inv = s.u.inverse_unimodular().expect("smith transform is unimodular");
        let cols: Vec<Vec<BigInt>> = (0..s.rank()).map(|j| u_inv.col(j)).collect();
        Sublattice::spanned_by(&IntMat::from_columns(self.ambient, &cols))
    }

    /// `[outer : self]`.
    pub fn index_in(&self, outer: &Sublattice) -> Result<LatticeIndex> {
        if self.ambient != outer.ambient {
            return Err(Error::Shape(format!(
                "ambient ranks differ ({} vs {})",
                self.ambient, outer.ambient
            )));
        }
        let coords: Option<Vec<Vec<BigInt>>> =
            (0..self.rank()).map(|j| outer.coordinates(&self.basis.col(j))).collect();
        let coords = coords.ok_or(Error::NotContained)?;
        if self.rank() < outer.rank() {
            return Ok(LatticeIndex::Infinite);
        }
        let c = IntMat::from_columns(outer.rank(), &coords);
        let inv = smith_normal_form(&c).invariants();
        Ok(LatticeIndex::Finite(inv.iter().map(|x| x.abs()).product::<BigInt>()))
    }

    /// `[Z^k : self]`.
    pub fn index(&self) -> LatticeIndex {
        self.index_in(&Sublattice::full(self.ambient)).expect("every sublattice lies in Z^k")
    }

    pub fn is_full(&self) -> bool {
        self.index().finite().is_some_and(One::is_one)
    }
}
