//! Brute-force verifiers for the determinant formulas. Counts come from Smith
//! normal forms and explicit coset enumeration, never from a determinant.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{cokernel_order, smith_normal_form, IntMat, RatMat};
use crate::morphism::{index_product, linearisation_matrices, twist_by_holonomy};
use crate::nielsen::{nvalued_nielsen_with, projection_inner, NValuedInput, NielsenReport};

/// Refuse to enumerate more cosets than this.
pub const MAX_ENUMERATION: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointCount {
    Finite(#[serde(serialize_with = "crate::json::int")] BigInt),
    /// Infinitely many solutions.
    Degenerate,
}

impl fmt::Display for PointCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointCount::Finite(n) => write!(f, "{n}"),
            PointCount::Degenerate => write!(f, "degenerate"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReidemeisterOrder {
    Finite(#[serde(serialize_with = "crate::json::int")] BigInt),
    Infinite,
}

impl ReidemeisterOrder {
    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            ReidemeisterOrder::Finite(n) => Some(n),
            ReidemeisterOrder::Infinite => None,
        }
    }
}

impl fmt::Display for ReidemeisterOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReidemeisterOrder::Finite(n) => write!(f, "{n}"),
            ReidemeisterOrder::Infinite => write!(f, "infinite"),
        }
    }
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Points of `R^k / Z^k` with `A·x ≡ c (mod Z^k)`.
///
/// With `U·A·V = D`, the substitution `x = V·y` turns the system into
/// `d_i·y_i ≡ (U·c)_i`, whose solutions are enumerated one coset at a time,
/// mapped back, reduced into `[0,1)^k` and verified against the original
/// congruence.
fn congruence_solutions(a: &IntMat, c: &[BigRational]) -> Result<PointCount> {
    a.require_square()?;
    let k = a.rows();
    if c.len() != k {
        return Err(Error::Shape(format!("translation has length {}, expected {k}", c.len())));
    }
    let snf = smith_normal_form(a);
    let d = snf.invariants();
    let uc = v_times(&snf.u.to_rat(), c);

    let mut degenerate = false;
    for (di, ci) in d.iter().zip(&uc) {
        if di.is_zero() {
            if !ci.is_integer() {
                return Ok(PointCount::Finite(BigInt::zero()));
            }
            degenerate = true;
        }
    }
    if degenerate {
        return Ok(PointCount::Degenerate);
    }

    let sizes: Vec<u64> = d.iter().map(|x| x.abs().to_u64().unwrap_or(u64::MAX)).collect();
    let total = sizes.iter().try_fold(1u64, |acc, &s| acc.checked_mul(s)).unwrap_or(u64::MAX);
    if total > MAX_ENUMERATION {
        return Err(Error::invalid(format!("{total} cosets exceed the enumeration limit {MAX_ENUMERATION}")));
    }

    let v = snf.v.to_rat();
    let a_rat = a.to_rat();
    let mut points: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    let mut digits = vec![0u64; k];
    for _ in 0..total {
        let y: Vec<BigRational> = (0..k)
            .map(|i| (&uc[i] + BigRational::from_integer(digits[i].into())) / BigRational::from_integer(d[i].clone()))
            .collect();
        let x: Vec<BigRational> = v_times(&v, &y).iter().map(frac).collect();
        let residual = v_times(&a_rat, &x);
        if residual.iter().zip(c).any(|(r, ci)| !(r - ci).is_integer()) {
            return Err(Error::Inconsistent(format!("enumerated point {x:?} does not solve the congruence")));
        }
        points.insert(x);
        for (digit, &size) in digits.iter_mut().zip(&sizes) {
            *digit += 1;
            if *digit < size {
                break;
            }
            *digit = 0;
        }
    }
    Ok(PointCount::Finite(BigInt::from(points.len())))
}

fn v_times(m: &RatMat, y: &[BigRational]) -> Vec<BigRational> {
    (0..m.rows())
        .map(|i| (0..m.cols()).fold(BigRational::zero(), |acc, j| acc + &m[(i, j)] * &y[j]))
        .collect()
}

/// Fixed points of `x ↦ F·x + b` on the torus `R^k / Z^k`.
pub fn affine_torus_fixed_points(f: &IntMat, b: &[BigRational]) -> Result<PointCount> {
    f.require_square()?;
    congruence_solutions(&IntMat::identity(f.rows()).sub(f)?, b)
}

/// Coincidences of `x ↦ F·x + b_F` and `x ↦ G·x + b_G` on the torus.
pub fn affine_torus_coincidences(
    f: &IntMat,
    g: &IntMat,
    b_f: &[BigRational],
    b_g: &[BigRational],
) -> Result<PointCount> {
    if b_f.len() != b_g.len() {
        return Err(Error::Shape("translations of different lengths".into()));
    }
    let c: Vec<BigRational> = b_f.iter().zip(b_g).map(|(x, y)| x - y).collect();
    congruence_solutions(&g.sub(f)?, &c)
}

/// `|Z^k / A·Z^k|`, read off the Smith form.
pub fn reidemeister_order(a: &IntMat) -> Result<ReidemeisterOrder> {
    Ok(match cokernel_order(a)? {
        Some(n) => ReidemeisterOrder::Finite(n),
        None => ReidemeisterOrder::Infinite,
    })
}

/// `N(ᾱ·f̄_j, q)` for one branch and label, recomputed on the refined chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermRecomputation {
    pub branch: usize,
    pub label: String,
    #[serde(serialize_with = "crate::json::int")]
    pub value: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AveragingCrosscheck {
    #[serde(serialize_with = "crate::json::int")]
    pub nielsen: BigInt,
    #[serde(serialize_with = "crate::json::rational")]
    pub recomputed: BigRational,
    /// `[Γ:S]` for the chain scaled by 2.
    #[serde(serialize_with = "crate::json::int")]
    pub refined_index: BigInt,
    pub terms: Vec<TermRecomputation>,
    pub agree: bool,
}

/// Recomputes every summand as the coincidence number of the twisted lift with
/// the covering projection, linearised afresh on the chain scaled by 2, and
/// averages with `1/[π:S] = 1/(|Q|·[Γ:S])`.
pub fn averaging_crosscheck(input: &NValuedInput, bound: u32) -> Result<AveragingCrosscheck> {
    averaging_crosscheck_with(input, bound, Execution::default())
}

pub fn averaging_crosscheck_with(input: &NValuedInput, bound: u32, exec: Execution) -> Result<AveragingCrosscheck> {
    let report = nvalued_nielsen_with(input, bound, exec)?;
    crosscheck_report(input, &report, bound, exec)
}

/// [`averaging_crosscheck`] against an already computed report.
pub fn crosscheck_report(
    input: &NValuedInput,
    report: &NielsenReport,
    bound: u32,
    exec: Execution,
) -> Result<AveragingCrosscheck> {
    let spec = &input.infra;
    let tower = &spec.tower;
    let refined = input.chain.scaled(2);
    let refined_index = index_product(&refined)?;

    let pairs: Vec<(usize, &str)> = (0..input.n())
        .flat_map(|j| spec.holonomy.labels().iter().map(move |l| (j, l.as_str())))
        .collect();
    let values = exec.map(&pairs, |&(j, label)| -> Result<TermRecomputation> {
        let twisted = twist_by_holonomy(&input.branches[j], label, spec)?;
        let images = (0..=tower.depth())
            .map(|i| {
                twisted.matrix(i).mul_int(refined.basis(i))?.to_int().ok_or_else(|| {
                    Error::Inconsistent(format!("twisted branch {} is not integral on the refined chain", j + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let relinearised = linearisation_matrices(tower, &images, &refined)?;
        let p = projection_inner(tower, &relinearised, bound, Execution::Sequential, Some(&report.netness))?;
        Ok(TermRecomputation { branch: j + 1, label: label.to_string(), value: p.value })
    });
    let terms = values.into_iter().collect::<Result<Vec<_>>>()?;
    let sum: BigInt = terms.iter().map(|t| &t.value).sum();
    let divisor = &refined_index * BigInt::from(spec.holonomy.order());
    let recomputed = BigRational::new(sum, divisor);
    let agree = recomputed == BigRational::from_integer(report.value.clone());
    Ok(AveragingCrosscheck { nielsen: report.value.clone(), recomputed, refined_index, terms, agree })
}

/// `|det(I − A_i(q)·F_{i,j})|` checked against
/// `|coker(B_i − A_i(q)·F_{i,j}·B_i)| / |coker B_i|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorCheck {
    pub branch: usize,
    pub label: String,
    pub level: usize,
    #[serde(serialize_with = "crate::json::rational")]
    pub factor: BigRational,
    pub reidemeister: ReidemeisterOrder,
    #[serde(serialize_with = "crate::json::int")]
    pub chain_index: BigInt,
    pub pass: bool,
}

pub fn reidemeister_factor_checks(input: &NValuedInput, report: &NielsenReport) -> Result<Vec<FactorCheck>> {
    let spec = &input.infra;
    let mut out = vec![];
    for term in &report.terms {
        let twisted = twist_by_holonomy(&input.branches[term.branch - 1], &term.label, spec)?;
        for (level, factor) in term.level_factors.iter().enumerate() {
            let b = input.chain.basis(level);
            let image = twisted
                .matrix(level)
                .mul_int(b)?
                .to_int()
                .ok_or_else(|| Error::Inconsistent("twisted image is not integral".into()))?;
            let reidemeister = reidemeister_order(&b.sub(&image)?)?;
            let chain_index = cokernel_order(b)?.ok_or_else(|| Error::Singular("chain basis".into()))?;
            let pass = match reidemeister.finite() {
                None => factor.is_zero(),
                Some(n) => *factor == BigRational::new(n.clone(), chain_index.clone()),
            };
            out.push(FactorCheck {
                branch: term.branch,
                label: term.label.clone(),
                level,
                factor: factor.clone(),
                reidemeister,
                chain_index,
                pass,
            });
        }
    }
    Ok(out)
}

/// Per-level counterpart of [`reidemeister_factor_checks`] for `N(f, g)`:
/// `|det((G_i − F_i)·B_i)|` against `|coker((G_i − F_i)·B_i)|`.
pub fn coincidence_factor_orders(f: &[RatMat], g: &[RatMat], chain: &[IntMat]) -> Result<Vec<ReidemeisterOrder>> {
    f.iter()
        .zip(g)
        .zip(chain)
        .map(|((f, g), b)| {
            let m = g.sub(f)?.mul_int(b)?;
            let m = m.to_int().ok_or_else(|| Error::Inconsistent("(G - F)·B is not integral".into()))?;
            reidemeister_order(&m)
        })
        .collect()
}
