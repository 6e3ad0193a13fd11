//! Linearisation matrices of morphisms between towers.
//!
//! A morphism is given per level by a rational matrix `F_i` acting on a
//! finite-index sublattice `B_i·Z^{k_i}` of the target's `Z^{k_i}`. The domain
//! sublattices form a [`SublatticeChain`].

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{IntMat, RatMat, Sublattice};
use crate::tower::{InfraSpec, TowerSpec};

/// Full-rank sublattices `B_i·Z^{k_i}`, one per level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SublatticeChain {
    bases: Vec<IntMat>,
}

impl SublatticeChain {
    pub fn new(bases: Vec<IntMat>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::invalid("a chain needs at least the level-0 sublattice"));
        }
        for (i, b) in bases.iter().enumerate() {
            if !b.is_square() {
                return Err(Error::NotSquare { rows: b.rows(), cols: b.cols() });
            }
            if b.determinant()?.is_zero() {
                return Err(Error::Singular(format!("B{i} = {b}")));
            }
        }
        Ok(SublatticeChain { bases })
    }

    /// `B_i = I` at every level.
    pub fn identity(ranks: &[usize]) -> Self {
        SublatticeChain { bases: ranks.iter().map(|&k| IntMat::identity(k)).collect() }
    }

    pub fn depth(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(IntMat::rows).collect()
    }

    pub fn basis(&self, level: usize) -> &IntMat {
        &self.bases[level]
    }

    pub fn bases(&self) -> &[IntMat] {
        &self.bases
    }

    pub fn sublattice(&self, level: usize) -> Sublattice {
        Sublattice::spanned_by(&self.bases[level])
    }

    pub fn is_identity(&self) -> bool {
        self.bases.iter().all(|b| Sublattice::spanned_by(b).is_full())
    }

    /// `s·B_i` at every level.
    pub fn scaled(&self, s: i64) -> Self {
        let s = BigInt::from(s);
        SublatticeChain { bases: self.bases.iter().map(|b| b.scale(&s)).collect() }
    }

    /// `B_i·B'_i`: the sublattice whose coordinates relative to `B_i` are given by `B'_i`.
    pub fn refined_by(&self, relative: &[IntMat]) -> Result<Self> {
        if relative.len() != self.bases.len() {
            return Err(Error::Shape("refinement depth differs from chain depth".into()));
        }
        let bases = self.bases.iter().zip(relative).map(|(b, r)| b.mul(r)).collect::<Result<Vec<_>>>()?;
        SublatticeChain::new(bases)
    }

    /// Whether `other` lies inside `self` level by level.
    pub fn contains(&self, other: &SublatticeChain) -> bool {
        self.bases.len() == other.bases.len()
            && (0..self.bases.len()).all(|i| other.sublattice(i).is_subset_of(&self.sublattice(i)))
    }

    pub(crate) fn check_ranks(&self, tower: &TowerSpec) -> Result<()> {
        if self.ranks() != tower.ranks() {
            return Err(Error::Shape(format!(
                "chain ranks {:?} do not match tower ranks {:?}",
                self.ranks(),
                tower.ranks()
            )));
        }
        Ok(())
    }
}

/// `Π_i |det(B_i)|`, the index of the domain group in the target group.
/// Each factor is cross-checked against the lattice index computed from the
/// Hermite basis.
pub fn index_product(chain: &SublatticeChain) -> Result<BigInt> {
    let mut total = BigInt::from(1);
    for (i, b) in chain.bases().iter().enumerate() {
        let det = b.determinant()?.abs();
        if det.is_zero() {
            return Err(Error::Singular(format!("B{i}")));
        }
        let idx = chain.sublattice(i).index();
        if idx.finite() != Some(&det) {
            return Err(Error::Inconsistent(format!("|det B{i}| = {det} but lattice index is {idx:?}")));
        }
        total *= det;
    }
    Ok(total)
}

/// Linearisation matrices `F_0, …, F_c` on a chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerMorphism {
    chain: SublatticeChain,
    matrices: Vec<RatMat>,
}

impl TowerMorphism {
    pub fn new(chain: SublatticeChain, matrices: Vec<RatMat>) -> Result<Self> {
        if matrices.len() != chain.bases.len() {
            return Err(Error::Shape(format!(
                "{} linearisation matrices for a chain of depth {}",
                matrices.len(),
                chain.depth()
            )));
        }
        for (i, (f, b)) in matrices.iter().zip(&chain.bases).enumerate() {
            if f.rows() != b.rows() || f.cols() != b.rows() {
                return Err(Error::Shape(format!(
                    "F{i} is {}x{} but level {i} has rank {}",
                    f.rows(),
                    f.cols(),
                    b.rows()
                )));
            }
        }
        Ok(TowerMorphism { chain, matrices })
    }

    /// The identity morphism (inclusion of the chain).
    pub fn identity(chain: SublatticeChain) -> Self {
        let matrices = chain.bases.iter().map(|b| RatMat::identity(b.rows())).collect();
        TowerMorphism { chain, matrices }
    }

    pub fn from_integer(chain: SublatticeChain, matrices: Vec<IntMat>) -> Result<Self> {
        Self::new(chain, matrices.iter().map(IntMat::to_rat).collect())
    }

    pub fn chain(&self) -> &SublatticeChain {
        &self.chain
    }

    pub fn matrix(&self, level: usize) -> &RatMat {
        &self.matrices[level]
    }

    pub fn matrices(&self) -> &[RatMat] {
        &self.matrices
    }

    pub fn depth(&self) -> usize {
        self.matrices.len() - 1
    }

    /// Integer images `F_i·B_i` of the chain bases.
    pub fn images(&self) -> Result<Vec<IntMat>> {
        self.matrices
            .iter()
            .zip(&self.chain.bases)
            .enumerate()
            .map(|(i, (f, b))| {
                f.mul_int(b)?
                    .to_int()
                    .ok_or_else(|| Error::invalid(format!("F{i}·B{i} is not integral")))
            })
            .collect()
    }

    /// Integrality of `F_i·B_i` and the compatibility
    /// `F_i·μ_i(v) = μ_i(F_0·v)·F_i` on the basis of `B_0·Z^{k_0}`.
    /// Returns one message per violation; shape mismatches are errors.
    pub fn validate(&self, tower: &TowerSpec) -> Result<Vec<String>> {
        self.chain.check_ranks(tower)?;
        let mut out = vec![];
        for (i, (f, b)) in self.matrices.iter().zip(&self.chain.bases).enumerate() {
            if !f.mul_int(b)?.is_integral() {
                out.push(format!("integrality: F{i}·B{i} is not an integer matrix"));
            }
        }
        if !out.is_empty() || tower.depth() == 0 {
            return Ok(out);
        }
        let b0 = self.chain.basis(0);
        for s in 0..b0.cols() {
            let v = b0.col(s);
            let image = self.matrices[0].mul_vec(&v)?;
            let w: Vec<BigInt> = image.iter().map(|x| x.to_integer()).collect();
            for i in 1..=tower.depth() {
                let lhs = self.matrices[i].mul_int(&tower.mu(i, &v)?)?;
                let rhs = tower.mu(i, &w)?.to_rat().mul(&self.matrices[i])?;
                if lhs != rhs {
                    out.push(format!(
                        "compatibility: F{i}·mu{i}(v) != mu{i}(F0·v)·F{i} for basis vector {} of B0",
                        s + 1
                    ));
                }
            }
        }
        Ok(out)
    }

    pub fn ensure_valid(&self, tower: &TowerSpec) -> Result<()> {
        let problems = self.validate(tower)?;
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(problems))
        }
    }

    /// `F_i ↦ M_i·F_i` level by level.
    pub fn left_multiplied(&self, ms: &[IntMat]) -> Result<Self> {
        let matrices = self
            .matrices
            .iter()
            .zip(ms)
            .map(|(f, m)| m.to_rat().mul(f))
            .collect::<Result<Vec<_>>>()?;
        TowerMorphism::new(self.chain.clone(), matrices)
    }
}

/// `F_i = Y_i·B_i^{-1}` from the integer images `Y_i` of the chain bases,
/// validated against the tower.
pub fn linearisation_matrices(tower: &TowerSpec, images: &[IntMat], chain: &SublatticeChain) -> Result<TowerMorphism> {
    if images.len() != chain.bases.len() {
        return Err(Error::Shape("one image matrix per level is required".into()));
    }
    let matrices = images
        .iter()
        .zip(&chain.bases)
        .enumerate()
        .map(|(i, (y, b))| {
            let inv = b.to_rat().inverse().ok_or_else(|| Error::Singular(format!("B{i}")))?;
            y.to_rat().mul(&inv)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = TowerMorphism::new(chain.clone(), matrices)?;
    m.ensure_valid(tower)?;
    Ok(m)
}

/// Linearisation matrices of `ᾱ∘f`: `A_i(q)·F_i` on the same chain.
pub fn twist_by_holonomy(m: &TowerMorphism, label: &str, spec: &InfraSpec) -> Result<TowerMorphism> {
    let q = spec.holonomy.index_of(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    twist_by_index(m, q, spec)
}

pub(crate) fn twist_by_index(m: &TowerMorphism, q: usize, spec: &InfraSpec) -> Result<TowerMorphism> {
    m.left_multiplied(spec.holonomy.matrices(q))
}

/// Restricts `m` to a smaller chain and recomputes the linearisation
/// matrices from the restricted images; true iff they come out unchanged.
pub fn restriction_invariance_check(m: &TowerMorphism, refinement: &SublatticeChain) -> Result<bool> {
    if !m.chain.contains(refinement) {
        return Err(Error::NotContained);
    }
    let recomputed = refinement
        .bases
        .iter()
        .zip(&m.matrices)
        .enumerate()
        .map(|(i, (c, f))| {
            let images = f
                .mul_int(c)?
                .to_int()
                .ok_or_else(|| Error::invalid(format!("F{i} does not map the refinement integrally")))?;
            let inv = c.to_rat().inverse().ok_or_else(|| Error::Singular(format!("refined B{i}")))?;
            images.to_rat().mul(&inv)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(recomputed == m.matrices)
}
