//! Nielsen coincidence numbers of solvmanifold maps and Nielsen numbers of
//! n-valued maps on infra-solvmanifolds, from linearisation matrices.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{IntMat, RatMat};
use crate::morphism::{index_product, twist_by_index, SublatticeChain, TowerMorphism};
use crate::tower::{fmt_vec, netness_check_with, InfraSpec, LevelStatus, NetnessVerdict, TowerSpec};

/// `|det(G − F)|` for the induced maps of two torus maps.
pub fn torus_coincidence(f: &IntMat, g: &IntMat) -> Result<BigInt> {
    if f.rows() != g.rows() || f.cols() != g.cols() {
        return Err(Error::Shape(format!(
            "torus maps of different sizes: {}x{} vs {}x{}",
            f.rows(),
            f.cols(),
            g.rows(),
            g.cols()
        )));
    }
    Ok(g.sub(f)?.determinant()?.abs())
}

/// `Π_i |det(G_i − F_i)|` over the given levels; the empty product is 1.
pub fn nil_coincidence(levels: &[(IntMat, IntMat)]) -> Result<BigInt> {
    levels.iter().try_fold(BigInt::one(), |acc, (f, g)| Ok(acc * torus_coincidence(f, g)?))
}

fn abs_det_rat(m: &RatMat) -> Result<BigRational> {
    Ok(m.determinant()?.abs())
}

/// Status of the hypothesis that `det(ψ_i − μ_i(v)·φ_i)` does not depend on `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Condition2 {
    /// `det(ψ_0 − φ_0) = 0`.
    SatisfiedTrivially,
    /// Projection shape with a net target and `F_0` without eigenvalue 1.
    Certified,
    /// Constant on `[-bound, bound]^{k_0}`.
    BoxVerified { bound: u32 },
    /// A `v` in the box changes the determinant at `level`.
    Unverified {
        bound: u32,
        level: usize,
        #[serde(serialize_with = "crate::json::int_seq")]
        v: Vec<BigInt>,
    },
}

impl fmt::Display for Condition2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition2::SatisfiedTrivially => write!(f, "satisfied trivially (level-0 factor is 0)"),
            Condition2::Certified => write!(f, "certified"),
            Condition2::BoxVerified { bound } => write!(f, "box-verified (bound {bound})"),
            Condition2::Unverified { bound, level, v } => {
                write!(f, "unverified: varies at level {level} for v = {} (bound {bound})", fmt_vec(v))
            }
        }
    }
}

/// Independence of `det(I − μ_i(v)·F_i)` from `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Independence {
    /// Net target and `det(I − F_0) ≠ 0`.
    Certified,
    BoxVerified { bound: u32 },
    Unverified {
        bound: u32,
        level: usize,
        #[serde(serialize_with = "crate::json::int_seq")]
        v: Vec<BigInt>,
    },
}

impl fmt::Display for Independence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Independence::Certified => write!(f, "certified"),
            Independence::BoxVerified { bound } => write!(f, "box-verified (bound {bound})"),
            Independence::Unverified { bound, level, v } => {
                write!(f, "unverified: varies at level {level} for v = {} (bound {bound})", fmt_vec(v))
            }
        }
    }
}

/// First `(level, v)` in the box where `det(G_i − μ_i(v)·F_i) ≠ det(G_i − F_i)`.
fn first_varying(
    tower: &TowerSpec,
    f: &TowerMorphism,
    g: Option<&TowerMorphism>,
    bound: u32,
    exec: Execution,
) -> Result<Option<(usize, Vec<BigInt>)>> {
    let c = tower.depth();
    let lhs = |i: usize| g.map_or_else(|| RatMat::identity(tower.rank(i)), |g| g.matrix(i).clone());
    let reference = (1..=c)
        .map(|i| lhs(i).sub(f.matrix(i)).and_then(|m| m.determinant()))
        .collect::<Result<Vec<_>>>()?;
    let vectors = tower.box_vectors(bound);
    Ok(exec.find_map_first(&vectors, |v| {
        (1..=c).find_map(|i| {
            let twisted = tower.mu(i, v).ok()?.to_rat().mul(f.matrix(i)).ok()?;
            let det = lhs(i).sub(&twisted).ok()?.determinant().ok()?;
            (det != reference[i - 1]).then(|| (i, v.clone()))
        })
    }))
}

/// Certificate that `det(I − μ_i(v)·F_i)` is independent of `v`: the target
/// tower is net and `F_0` has no eigenvalue 1. Otherwise falls back to a
/// search over `[-bound, bound]^{k_0}`.
pub fn independence_certificate(tower: &TowerSpec, f: &TowerMorphism, bound: u32) -> Result<Independence> {
    let netness = netness_check_with(tower, bound, Execution::default())?;
    independence_with(tower, f, &netness, bound, Execution::default())
}

pub(crate) fn independence_with(
    tower: &TowerSpec,
    f: &TowerMorphism,
    netness: &NetnessVerdict,
    bound: u32,
    exec: Execution,
) -> Result<Independence> {
    f.ensure_valid(tower)?;
    let k0 = tower.base_rank();
    let no_eigenvalue_one = !RatMat::identity(k0).sub(f.matrix(0))?.determinant()?.is_zero();
    if no_eigenvalue_one && netness.is_net() {
        return Ok(Independence::Certified);
    }
    Ok(match first_varying(tower, f, None, bound, exec)? {
        None => Independence::BoxVerified { bound },
        Some((level, v)) => Independence::Unverified { bound, level, v },
    })
}

/// A pair of maps between special solvmanifolds with the same target tower;
/// `g` plays the role of `ψ`, `f` of `φ`.
#[derive(Clone, Debug)]
pub struct CoincidenceInput {
    pub tower: TowerSpec,
    pub f: TowerMorphism,
    pub g: TowerMorphism,
}

impl CoincidenceInput {
    pub fn new(tower: TowerSpec, f: TowerMorphism, g: TowerMorphism) -> Result<Self> {
        if f.chain() != g.chain() {
            return Err(Error::invalid("both maps must be linearised on the same chain"));
        }
        let mut problems = tower.validate();
        problems.extend(f.validate(&tower)?.into_iter().map(|p| format!("f: {p}")));
        problems.extend(g.validate(&tower)?.into_iter().map(|p| format!("g: {p}")));
        if !problems.is_empty() {
            return Err(Error::Invalid(problems));
        }
        Ok(CoincidenceInput { tower, f, g })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolvCoincidence {
    #[serde(serialize_with = "crate::json::int")]
    pub value: BigInt,
    /// `|det((G_i − F_i)·B_i)|` per level.
    #[serde(serialize_with = "crate::json::int_seq")]
    pub factors: Vec<BigInt>,
    pub condition2: Condition2,
}

/// `N(f, g) = Π_i |det(ψ_i − φ_i)|` where, with the domain sublattice
/// `Λ_i ≅ B_i·Z^{k_i}` identified with `Z^{k_i}` through `B_i`, the induced
/// maps are `φ_i = F_i·B_i` and `ψ_i = G_i·B_i`. With the identity chain this
/// is `Π_i |det(G_i − F_i)|`.
pub fn solv_coincidence(input: &CoincidenceInput, bound: u32) -> Result<SolvCoincidence> {
    solv_coincidence_with(input, bound, Execution::default())
}

pub fn solv_coincidence_with(input: &CoincidenceInput, bound: u32, exec: Execution) -> Result<SolvCoincidence> {
    solv_inner(input, bound, exec, None)
}

fn solv_inner(
    input: &CoincidenceInput,
    bound: u32,
    exec: Execution,
    netness: Option<&NetnessVerdict>,
) -> Result<SolvCoincidence> {
    let CoincidenceInput { tower, f, g } = input;
    let chain = f.chain();
    let factors = (0..=tower.depth())
        .map(|i| {
            let diff = g.matrix(i).sub(f.matrix(i))?.mul_int(chain.basis(i))?;
            let det = diff.determinant()?;
            if !det.is_integer() {
                return Err(Error::Inconsistent(format!("det((G{i} - F{i})·B{i}) = {det} is not an integer")));
            }
            Ok(det.to_integer().abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let value: BigInt = factors.iter().product();

    let condition2 = if factors[0].is_zero() {
        Condition2::SatisfiedTrivially
    } else {
        let projection_shape = g.matrices().iter().all(RatMat::is_identity);
        let certified = match (projection_shape, netness) {
            (false, _) => false,
            (true, Some(n)) => independence_with(tower, f, n, bound, exec)? == Independence::Certified,
            (true, None) => {
                let n = netness_check_with(tower, bound, exec)?;
                independence_with(tower, f, &n, bound, exec)? == Independence::Certified
            }
        };
        if certified {
            Condition2::Certified
        } else {
            match first_varying(tower, f, Some(g), bound, exec)? {
                None => Condition2::BoxVerified { bound },
                Some((level, v)) => Condition2::Unverified { bound, level, v },
            }
        }
    };
    Ok(SolvCoincidence { value, factors, condition2 })
}

/// Coincidence number of `f` with the covering projection, computed twice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionCoincidence {
    #[serde(serialize_with = "crate::json::int")]
    pub value: BigInt,
    /// `[Γ':Γ] = Π |det B_i|`
    #[serde(serialize_with = "crate::json::int")]
    pub index: BigInt,
    /// `|det(I − F_i)|`
    #[serde(serialize_with = "crate::json::rational_seq")]
    pub factors: Vec<BigRational>,
    /// `|det(B_i − F_i·B_i)|`, the coincidence route with the inclusion.
    #[serde(serialize_with = "crate::json::int_seq")]
    pub coincidence_factors: Vec<BigInt>,
    #[serde(serialize_with = "crate::json::int")]
    pub coincidence_value: BigInt,
    pub paths_agree: bool,
    pub condition2: Condition2,
}

/// `N(f, q) = [Γ':Γ]·Π_i |det(I − F_i)|`, checked against
/// `Π_i |det(B_i − F_i·B_i)|`; disagreement is an internal error.
pub fn projection_coincidence(tower: &TowerSpec, f: &TowerMorphism, bound: u32) -> Result<ProjectionCoincidence> {
    projection_coincidence_with(tower, f, bound, Execution::default())
}

pub fn projection_coincidence_with(
    tower: &TowerSpec,
    f: &TowerMorphism,
    bound: u32,
    exec: Execution,
) -> Result<ProjectionCoincidence> {
    projection_inner(tower, f, bound, exec, None)
}

pub(crate) fn projection_inner(
    tower: &TowerSpec,
    f: &TowerMorphism,
    bound: u32,
    exec: Execution,
    netness: Option<&NetnessVerdict>,
) -> Result<ProjectionCoincidence> {
    let chain = f.chain().clone();
    let index = index_product(&chain)?;
    let factors = (0..=tower.depth())
        .map(|i| abs_det_rat(&RatMat::identity(tower.rank(i)).sub(f.matrix(i))?))
        .collect::<Result<Vec<_>>>()?;
    let product = factors.iter().fold(BigRational::from_integer(index.clone()), |acc, x| acc * x);
    if !product.is_integer() {
        return Err(Error::Inconsistent(format!("[Γ':Γ]·Π|det(I - F_i)| = {product} is not an integer")));
    }
    let value = product.to_integer();

    let input = CoincidenceInput::new(tower.clone(), f.clone(), TowerMorphism::identity(chain))?;
    let route = solv_inner(&input, bound, exec, netness)?;
    if route.value != value {
        return Err(Error::Inconsistent(format!(
            "projection formula gives {value} but the coincidence route gives {}",
            route.value
        )));
    }
    Ok(ProjectionCoincidence {
        value,
        index,
        factors,
        coincidence_factors: route.factors,
        coincidence_value: route.value,
        paths_agree: true,
        condition2: route.condition2,
    })
}

/// An n-valued self-map of an infra-solvmanifold, through its linearisation.
#[derive(Clone, Debug)]
pub struct NValuedInput {
    pub infra: InfraSpec,
    pub chain: SublatticeChain,
    pub branches: Vec<TowerMorphism>,
    /// `sigma[q][j]`: image of branch `j` under the permutation of label `q`
    /// (zero-based). Metadata only.
    pub sigma: Option<Vec<Vec<usize>>>,
}

impl NValuedInput {
    pub fn new(
        infra: InfraSpec,
        chain: SublatticeChain,
        branches: Vec<TowerMorphism>,
        sigma: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let input = NValuedInput { infra, chain, branches, sigma };
        let problems = input.validate()?;
        if !problems.is_empty() {
            return Err(Error::Invalid(problems));
        }
        Ok(input)
    }

    /// Single-valued map with trivial holonomy and the identity chain.
    pub fn single(tower: TowerSpec, matrices: Vec<RatMat>) -> Result<Self> {
        let chain = SublatticeChain::identity(tower.ranks());
        let f = TowerMorphism::new(chain.clone(), matrices)?;
        NValuedInput::new(InfraSpec::untwisted(tower), chain, vec![f], None)
    }

    pub fn n(&self) -> usize {
        self.branches.len()
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        let mut out = self.infra.validate();
        self.chain.check_ranks(&self.infra.tower)?;
        if self.branches.is_empty() {
            out.push("an n-valued map needs n >= 1 branches".into());
        }
        for (j, b) in self.branches.iter().enumerate() {
            if b.chain() != &self.chain {
                out.push(format!("branch {}: linearised on a different chain", j + 1));
            }
            out.extend(b.validate(&self.infra.tower)?.into_iter().map(|p| format!("branch {}: {p}", j + 1)));
        }
        if let Some(sigma) = &self.sigma {
            out.extend(sigma_violations(&self.infra, sigma, self.n()));
        }
        Ok(out)
    }
}

fn sigma_violations(infra: &InfraSpec, sigma: &[Vec<usize>], n: usize) -> Vec<String> {
    let h = &infra.holonomy;
    let mut out = vec![];
    if sigma.len() != h.order() {
        return vec![format!("sigma must list one permutation per label ({} labels)", h.order())];
    }
    for (q, p) in sigma.iter().enumerate() {
        let mut seen = vec![false; n];
        if p.len() != n || p.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
            out.push(format!("sigma of `{}` is not a permutation of 1..={n}", h.label(q)));
        }
    }
    if !out.is_empty() {
        return out;
    }
    for a in 0..h.order() {
        for b in 0..h.order() {
            let ab = h.product(a, b);
            if (0..n).any(|j| sigma[ab][j] != sigma[a][sigma[b][j]]) {
                out.push(format!(
                    "sigma is not a homomorphism: sigma({}{}) != sigma({})·sigma({})",
                    h.label(a),
                    h.label(b),
                    h.label(a),
                    h.label(b)
                ));
            }
        }
    }
    out
}

/// One summand `Π_i |det(I − A_i(q)·F_{i,j})|` of the averaging formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    /// One-based branch number.
    pub branch: usize,
    pub label: String,
    #[serde(serialize_with = "crate::json::rational_seq")]
    pub level_factors: Vec<BigRational>,
    #[serde(serialize_with = "crate::json::rational")]
    pub product: BigRational,
    /// Nonzero terms have `det(I − A_i(q)·F_{i,j}) ≠ 0` at every level, so
    /// each induced level map fixes only 0 and the twisted morphism has
    /// trivial fixed subgroup. `None` for zero terms.
    pub trivial_fixed_subgroup: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Integrality {
    #[serde(serialize_with = "crate::json::rational")]
    pub raw_sum: BigRational,
    pub divisor: usize,
    pub integral: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum IndependenceSummary {
    /// No term with a nonzero level-0 factor.
    NotRequired,
    Certified,
    BoxVerified { bound: u32 },
    Unverified { branch: usize, label: String, detail: Independence },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NielsenReport {
    #[serde(serialize_with = "crate::json::int")]
    pub value: BigInt,
    pub terms: Vec<Term>,
    pub integrality: Integrality,
    pub netness: NetnessVerdict,
    pub independence: IndependenceSummary,
    /// The netness hypothesis is not certified; the value is conditional on it.
    pub conditional: bool,
    /// `Π_i |det(I − F_i)|` when the holonomy is trivial and `n = 1`.
    #[serde(serialize_with = "crate::json::opt_int")]
    pub keppelmann_mccord: Option<BigInt>,
    pub warnings: Vec<String>,
}

/// `N(f) = (1/[π:Γ])·Σ_j Σ_{q ∈ π/Γ} Π_i |det(I − A_i(q)·F_{i,j})|`.
pub fn nvalued_nielsen(input: &NValuedInput, bound: u32) -> Result<NielsenReport> {
    nvalued_nielsen_with(input, bound, Execution::default())
}

pub fn nvalued_nielsen_with(input: &NValuedInput, bound: u32, exec: Execution) -> Result<NielsenReport> {
    let problems = input.validate()?;
    if !problems.is_empty() {
        return Err(Error::Invalid(problems));
    }
    let spec = &input.infra;
    let h = &spec.holonomy;
    let c = spec.tower.depth();
    let netness = netness_check_with(&spec.tower, bound, exec)?;

    let pairs: Vec<(usize, usize)> =
        (0..input.n()).flat_map(|j| (0..h.order()).map(move |q| (j, q))).collect();
    let evaluated = exec.map(&pairs, |&(j, q)| -> Result<(Term, Option<Independence>)> {
        let twisted = twist_by_index(&input.branches[j], q, spec)?;
        let level_factors = (0..=c)
            .map(|i| abs_det_rat(&RatMat::identity(spec.tower.rank(i)).sub(twisted.matrix(i))?))
            .collect::<Result<Vec<_>>>()?;
        let product = level_factors.iter().fold(BigRational::one(), |acc, x| acc * x);
        let nonzero = !product.is_zero();
        let independence = if level_factors[0].is_zero() {
            None
        } else {
            Some(independence_with(&spec.tower, &twisted, &netness, bound, Execution::Sequential)?)
        };
        let term = Term {
            branch: j + 1,
            label: h.label(q).to_string(),
            trivial_fixed_subgroup: nonzero.then(|| level_factors.iter().all(|x| !x.is_zero())),
            level_factors,
            product,
        };
        Ok((term, independence))
    });

    let mut terms = Vec::with_capacity(pairs.len());
    let mut independence = IndependenceSummary::NotRequired;
    for item in evaluated {
        let (term, ind) = item?;
        match ind {
            Some(Independence::Certified) if independence == IndependenceSummary::NotRequired => {
                independence = IndependenceSummary::Certified;
            }
            Some(Independence::BoxVerified { bound }) if !matches!(independence, IndependenceSummary::Unverified { .. }) => {
                independence = IndependenceSummary::BoxVerified { bound };
            }
            Some(detail @ Independence::Unverified { .. }) if !matches!(independence, IndependenceSummary::Unverified { .. }) => {
                independence = IndependenceSummary::Unverified { branch: term.branch, label: term.label.clone(), detail };
            }
            _ => {}
        }
        terms.push(term);
    }

    let raw_sum = terms.iter().fold(BigRational::zero(), |acc, t| acc + &t.product);
    let divisor = h.order();
    let quotient = &raw_sum / BigRational::from_integer(BigInt::from(divisor));
    if !quotient.is_integer() {
        return Err(Error::NonIntegral { sum: raw_sum.to_string(), order: divisor });
    }
    let value = quotient.to_integer();

    let mut warnings = vec![];
    let status = netness.overall();
    let conditional = status != LevelStatus::Net;
    if conditional {
        warnings.push(format!("result conditional on netness (tower status: {status})"));
    }
    if let IndependenceSummary::Unverified { branch, label, detail } = &independence {
        warnings.push(format!("independence of representatives not established for branch {branch}, label `{label}`: {detail}"));
    }
    debug_assert!(terms.iter().all(|t| t.trivial_fixed_subgroup != Some(false)));

    Ok(NielsenReport {
        value,
        terms,
        integrality: Integrality { raw_sum, divisor, integral: true },
        netness,
        independence,
        conditional,
        keppelmann_mccord: None,
        warnings,
    })
}

/// `n = 1` case of [`nvalued_nielsen`]. With trivial holonomy the value is
/// also checked against `Π_i |det(I − F_i)|`.
pub fn single_valued_nielsen(input: &NValuedInput, bound: u32) -> Result<NielsenReport> {
    if input.n() != 1 {
        return Err(Error::invalid(format!("single-valued formula needs n = 1, got n = {}", input.n())));
    }
    let mut report = nvalued_nielsen(input, bound)?;
    if input.infra.holonomy.is_trivial() {
        let f = &input.branches[0];
        let product = (0..=input.infra.tower.depth()).try_fold(BigRational::one(), |acc, i| -> Result<_> {
            Ok(acc * abs_det_rat(&RatMat::identity(f.matrix(i).rows()).sub(f.matrix(i))?)?)
        })?;
        if product != BigRational::from_integer(report.value.clone()) {
            return Err(Error::Inconsistent(format!(
                "averaging formula gives {} but Π|det(I - F_i)| = {product}",
                report.value
            )));
        }
        report.keppelmann_mccord = Some(product.to_integer());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::HolonomySpec;

    fn m(rows: &[Vec<i64>]) -> IntMat {
        IntMat::from_rows(rows)
    }

    fn sol_tower() -> TowerSpec {
        TowerSpec::new(vec![1, 2], vec![vec![m(&[vec![2, 1], vec![1, 1]])]]).unwrap()
    }

    fn sol_flip(chain: SublatticeChain) -> TowerMorphism {
        TowerMorphism::from_integer(chain, vec![m(&[vec![-1]]), m(&[vec![0, 1], vec![-1, 0]])]).unwrap()
    }

    fn klein() -> InfraSpec {
        let h = HolonomySpec::new(
            vec!["e".into(), "b".into()],
            0,
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![IntMat::identity(2)], vec![IntMat::diag(&[-1, 1])]],
        )
        .unwrap();
        InfraSpec::new(TowerSpec::torus(2), h).unwrap()
    }

    #[test]
    fn torus_examples() {
        let f = IntMat::diag(&[2, 3]);
        assert_eq!(torus_coincidence(&f, &f).unwrap(), BigInt::zero());
        assert_eq!(torus_coincidence(&IntMat::zeros(2, 2), &IntMat::identity(2)).unwrap(), BigInt::one());
        assert_eq!(torus_coincidence(&f, &IntMat::identity(2)).unwrap(), BigInt::from(2));
        assert!(torus_coincidence(&f, &IntMat::identity(3)).is_err());
    }

    #[test]
    fn nil_examples() {
        let f = IntMat::diag(&[2, 3]);
        assert_eq!(nil_coincidence(&[(f.clone(), f.clone())]).unwrap(), BigInt::zero());
        assert_eq!(nil_coincidence(&[(IntMat::scalar(2, 2), IntMat::identity(2))]).unwrap(), BigInt::one());
        let pairs = [(m(&[vec![3]]), m(&[vec![1]])), (m(&[vec![4]]), m(&[vec![1]]))];
        assert_eq!(nil_coincidence(&pairs).unwrap(), BigInt::from(6));
        assert_eq!(nil_coincidence(&[]).unwrap(), BigInt::one());
    }

    #[test]
    fn solv_examples() {
        let t = sol_tower();
        let chain = SublatticeChain::identity(t.ranks());
        let f = sol_flip(chain.clone());
        let same = CoincidenceInput::new(t.clone(), f.clone(), f.clone()).unwrap();
        let r = solv_coincidence(&same, 3).unwrap();
        assert_eq!((r.value, r.condition2), (BigInt::zero(), Condition2::SatisfiedTrivially));

        let proj = CoincidenceInput::new(t.clone(), f.clone(), TowerMorphism::identity(chain)).unwrap();
        let r = solv_coincidence(&proj, 3).unwrap();
        assert_eq!(r.value, BigInt::from(4));
        assert_eq!(r.factors, vec![BigInt::from(2), BigInt::from(2)]);
        assert_eq!(r.condition2, Condition2::Certified);
    }

    #[test]
    fn solv_with_depth_zero_is_torus() {
        let t = TowerSpec::torus(2);
        let chain = SublatticeChain::identity(&[2]);
        let f = TowerMorphism::from_integer(chain.clone(), vec![IntMat::diag(&[2, 3])]).unwrap();
        let g = TowerMorphism::from_integer(chain, vec![m(&[vec![1, 1], vec![0, 1]])]).unwrap();
        let r = solv_coincidence(&CoincidenceInput::new(t, f, g).unwrap(), 3).unwrap();
        let direct = torus_coincidence(&IntMat::diag(&[2, 3]), &m(&[vec![1, 1], vec![0, 1]])).unwrap();
        assert_eq!(r.value, direct);
        assert_eq!(r.condition2, Condition2::BoxVerified { bound: 3 });
    }

    #[test]
    fn independence_examples() {
        let t = sol_tower();
        let chain = SublatticeChain::identity(t.ranks());
        assert_eq!(independence_certificate(&t, &sol_flip(chain.clone()), 3).unwrap(), Independence::Certified);

        // F_0 = 1 (eigenvalue 1): F_1 must commute with M, take F_1 = M
        let f = TowerMorphism::from_integer(chain, vec![m(&[vec![1]]), m(&[vec![2, 1], vec![1, 1]])]).unwrap();
        let ind = independence_certificate(&t, &f, 2).unwrap();
        // det(I − M^{v+1}) varies with v
        assert!(matches!(ind, Independence::Unverified { level: 1, .. }));

        let nil = TowerSpec::new(vec![1, 2], vec![vec![m(&[vec![1, 1], vec![0, 1]])]]).unwrap();
        let f = TowerMorphism::from_integer(
            SublatticeChain::identity(nil.ranks()),
            vec![m(&[vec![-1]]), m(&[vec![1, 0], vec![0, -1]])],
        )
        .unwrap();
        assert!(f.validate(&nil).unwrap().is_empty());
        assert_eq!(independence_certificate(&nil, &f, 3).unwrap(), Independence::Certified);
    }

    #[test]
    fn projection_examples() {
        let t = sol_tower();
        let id_chain = SublatticeChain::identity(t.ranks());
        let id = TowerMorphism::identity(id_chain.clone());
        assert_eq!(projection_coincidence(&t, &id, 3).unwrap().value, BigInt::zero());

        let p = projection_coincidence(&t, &sol_flip(id_chain), 3).unwrap();
        assert_eq!(p.value, BigInt::from(4));
        assert_eq!(p.index, BigInt::one());

        let chain = SublatticeChain::new(vec![m(&[vec![2]]), IntMat::identity(2)]).unwrap();
        let f = sol_flip(chain);
        assert!(f.validate(&t).unwrap().is_empty());
        let p = projection_coincidence(&t, &f, 3).unwrap();
        assert_eq!(p.value, BigInt::from(8));
        assert_eq!(p.index, BigInt::from(2));
        assert_eq!(p.coincidence_factors, vec![BigInt::from(4), BigInt::from(2)]);
        assert!(p.paths_agree);
    }

    #[test]
    fn nvalued_examples() {
        // identity map with trivial holonomy
        let t = TowerSpec::torus(2);
        let input = NValuedInput::single(t.clone(), vec![RatMat::identity(2)]).unwrap();
        assert_eq!(nvalued_nielsen(&input, 3).unwrap().value, BigInt::zero());

        // 2-valued torus map
        let chain = SublatticeChain::identity(&[2]);
        let b1 = TowerMorphism::from_integer(chain.clone(), vec![IntMat::scalar(2, 2)]).unwrap();
        let b2 = TowerMorphism::from_integer(chain.clone(), vec![m(&[vec![2, 1], vec![0, 2]])]).unwrap();
        let input = NValuedInput::new(InfraSpec::untwisted(t), chain, vec![b1, b2], None).unwrap();
        let r = nvalued_nielsen(&input, 3).unwrap();
        assert_eq!(r.value, BigInt::from(2));
        assert_eq!(r.terms.len(), 2);

        // Klein bottle, F_0 = diag(2,3)
        let chain = SublatticeChain::identity(&[2]);
        let f = TowerMorphism::from_integer(chain.clone(), vec![IntMat::diag(&[2, 3])]).unwrap();
        let input = NValuedInput::new(klein(), chain.clone(), vec![f], None).unwrap();
        let r = nvalued_nielsen(&input, 3).unwrap();
        assert_eq!(r.value, BigInt::from(4));
        let products: Vec<BigRational> = r.terms.iter().map(|t| t.product.clone()).collect();
        assert_eq!(products, vec![BigRational::from_integer(2.into()), BigRational::from_integer(6.into())]);
        assert_eq!(r.integrality.raw_sum, BigRational::from_integer(8.into()));
        assert!(!r.conditional && r.warnings.is_empty());

        // identity on the Klein bottle: the twisted term |det(I − diag(-1,1))| = 0 as well
        let id = TowerMorphism::identity(chain.clone());
        let input = NValuedInput::new(klein(), chain, vec![id], None).unwrap();
        assert_eq!(nvalued_nielsen(&input, 3).unwrap().value, BigInt::zero());
    }

    #[test]
    fn single_valued_examples() {
        let circle = NValuedInput::single(TowerSpec::torus(1), vec![m(&[vec![3]]).to_rat()]).unwrap();
        let r = single_valued_nielsen(&circle, 3).unwrap();
        assert_eq!(r.value, BigInt::from(2));
        assert_eq!(r.keppelmann_mccord, Some(BigInt::from(2)));

        let id = NValuedInput::single(sol_tower(), vec![RatMat::identity(1), RatMat::identity(2)]).unwrap();
        assert_eq!(single_valued_nielsen(&id, 3).unwrap().value, BigInt::zero());

        let chain = SublatticeChain::identity(&[2]);
        let f = TowerMorphism::from_integer(chain.clone(), vec![IntMat::diag(&[2, 3])]).unwrap();
        let input = NValuedInput::new(klein(), chain.clone(), vec![f.clone()], None).unwrap();
        let r = single_valued_nielsen(&input, 3).unwrap();
        assert_eq!(r.value, BigInt::from(4));
        assert_eq!(r.keppelmann_mccord, None);

        let two = NValuedInput::new(klein(), chain, vec![f.clone(), f], None).unwrap();
        assert!(single_valued_nielsen(&two, 3).is_err());
    }

    #[test]
    fn non_integral_average_is_a_hard_error() {
        // swap holonomy with a map that does not commute with it
        let h = HolonomySpec::new(
            vec!["e".into(), "s".into()],
            0,
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![IntMat::identity(2)], vec![m(&[vec![0, 1], vec![1, 0]])]],
        )
        .unwrap();
        let spec = InfraSpec::new(TowerSpec::torus(2), h).unwrap();
        let chain = SublatticeChain::identity(&[2]);
        let f = TowerMorphism::from_integer(chain.clone(), vec![IntMat::diag(&[2, 3])]).unwrap();
        let input = NValuedInput::new(spec, chain, vec![f], None).unwrap();
        // |det(I − F)| = 2, |det(I − S·F)| = |1 − 6| = 5
        assert!(matches!(nvalued_nielsen(&input, 3), Err(Error::NonIntegral { order: 2, .. })));
    }

    #[test]
    fn unknown_netness_is_flagged() {
        // Fibonacci action: NR but -1 = det is in the eigenvalue group
        let t = TowerSpec::new(vec![1, 2], vec![vec![m(&[vec![1, 1], vec![1, 0]])]]).unwrap();
        let input = NValuedInput::single(t, vec![RatMat::identity(1), RatMat::identity(2)]).unwrap();
        let r = nvalued_nielsen(&input, 3).unwrap();
        assert!(r.conditional);
        assert!(r.warnings[0].contains("conditional on netness"));
    }

    #[test]
    fn sigma_must_be_a_homomorphism() {
        let chain = SublatticeChain::identity(&[2]);
        let f = TowerMorphism::from_integer(chain.clone(), vec![IntMat::diag(&[2, 3])]).unwrap();
        let ok = NValuedInput::new(klein(), chain.clone(), vec![f.clone(), f.clone()], Some(vec![vec![0, 1], vec![1, 0]]));
        assert!(ok.is_ok());
        let bad = NValuedInput::new(klein(), chain.clone(), vec![f.clone(), f.clone()], Some(vec![vec![1, 0], vec![1, 0]]));
        assert!(bad.is_err());
        let not_perm = NValuedInput::new(klein(), chain, vec![f.clone(), f], Some(vec![vec![0, 0], vec![1, 0]]));
        assert!(not_perm.is_err());
    }
}
