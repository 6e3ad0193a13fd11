//! Linearisation data of a strongly torsion-free S-group and of a finite
//! extension of it, together with the spectral (NR / net) checks.
//!
//! A tower of depth `c` consists of ranks `k_0, …, k_c` and, for every level
//! `i ≥ 1`, the images `M_{i,t} = μ_i(e_t)` of the standard basis of
//! `Z^{k_0}` in `GL_{k_i}(Z)`. Because `μ_i` is a homomorphism from an
//! abelian group, `μ_i(v) = Π_t M_{i,t}^{v_t}`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{all_roots_positive_real, char_poly, cyclotomic_divisors, IntMat};

/// Largest holonomy group accepted.
pub const MAX_HOLONOMY_ORDER: usize = 1024;

pub const DEFAULT_BOX_BOUND: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerSpec {
    ranks: Vec<usize>,
    /// `actions[i - 1][t] = M_{i,t}`
    actions: Vec<Vec<IntMat>>,
}

impl TowerSpec {
    /// Checks shapes only; the algebraic invariants are reported by [`TowerSpec::validate`].
    pub fn new(ranks: Vec<usize>, actions: Vec<Vec<IntMat>>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::invalid("a tower needs at least the rank k0"));
        }
        if ranks.contains(&0) {
            return Err(Error::invalid("every rank k_i must be positive"));
        }
        if actions.len() != ranks.len() - 1 {
            return Err(Error::invalid(format!(
                "depth c = {} needs {} action levels, got {}",
                ranks.len() - 1,
                ranks.len() - 1,
                actions.len()
            )));
        }
        let mut problems = vec![];
        for (idx, level) in actions.iter().enumerate() {
            let i = idx + 1;
            if level.len() != ranks[0] {
                problems.push(format!("level {i}: expected {} action generators, got {}", ranks[0], level.len()));
            }
            for (t, m) in level.iter().enumerate() {
                if m.rows() != ranks[i] || m.cols() != ranks[i] {
                    problems.push(format!(
                        "M{}_{}: expected {}x{}, got {}x{}",
                        i,
                        t + 1,
                        ranks[i],
                        ranks[i],
                        m.rows(),
                        m.cols()
                    ));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Invalid(problems));
        }
        Ok(TowerSpec { ranks, actions })
    }

    /// `Z^k` with no nilpotent part.
    pub fn torus(k0: usize) -> Self {
        TowerSpec { ranks: vec![k0], actions: vec![] }
    }

    /// Depth `c`.
    pub fn depth(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self, level: usize) -> usize {
        self.ranks[level]
    }

    pub fn base_rank(&self) -> usize {
        self.ranks[0]
    }

    /// `M_{i,t}` with `i ≥ 1` and zero-based `t`.
    pub fn action(&self, level: usize, t: usize) -> &IntMat {
        &self.actions[level - 1][t]
    }

    pub fn generators(&self, level: usize) -> &[IntMat] {
        &self.actions[level - 1]
    }

    /// `μ_i(v)` for an integer vector `v ∈ Z^{k_0}`.
    pub fn mu(&self, level: usize, v: &[BigInt]) -> Result<IntMat> {
        if v.len() != self.base_rank() {
            return Err(Error::Shape(format!("vector of length {} for k0 = {}", v.len(), self.base_rank())));
        }
        let mut acc = IntMat::identity(self.ranks[level]);
        for (m, e) in self.generators(level).iter().zip(v) {
            if e.is_zero() {
                continue;
            }
            let base = if e.is_negative() {
                m.inverse_unimodular()
                    .ok_or_else(|| Error::Singular(format!("action generator {m} is not unimodular")))?
            } else {
                m.clone()
            };
            let exp = e.abs().to_u64().ok_or_else(|| Error::Shape("exponent too large".into()))?;
            acc = acc.mul(&base.pow(exp)?)?;
        }
        Ok(acc)
    }

    /// Every violation of unimodularity or commutativity of the action generators.
    pub fn validate(&self) -> Vec<String> {
        let mut out = vec![];
        for i in 1..=self.depth() {
            let gens = self.generators(i);
            for (t, m) in gens.iter().enumerate() {
                let det = m.determinant().expect("square by construction");
                if !det.abs().is_one() {
                    out.push(format!("M{}_{}: action matrix not unimodular (det = {det})", i, t + 1));
                }
            }
            for s in 0..gens.len() {
                for t in s + 1..gens.len() {
                    let st = gens[s].mul(&gens[t]).expect("same size");
                    let ts = gens[t].mul(&gens[s]).expect("same size");
                    if st != ts {
                        out.push(format!("M{}_{} and M{}_{} do not commute", i, s + 1, i, t + 1));
                    }
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let problems = self.validate();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(problems))
        }
    }

    /// All integer vectors of `[-bound, bound]^{k_0}`, the zero vector first.
    pub fn box_vectors(&self, bound: u32) -> Vec<Vec<BigInt>> {
        box_vectors(self.base_rank(), bound)
    }
}

pub(crate) fn box_vectors(dim: usize, bound: u32) -> Vec<Vec<BigInt>> {
    let b = i64::from(bound);
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-b..=b).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    // order by max-norm so that searches report the smallest witness first
    out.sort_by_key(|v| (v.iter().map(|x| x.abs()).max().unwrap_or(0), v.clone()));
    out.into_iter().map(|v| v.into_iter().map(BigInt::from).collect()).collect()
}

/// Finite quotient `Q = π/Γ` with the matrices `A_i(q)` on chosen coset
/// representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolonomySpec {
    labels: Vec<String>,
    identity: usize,
    /// `table[a][b]` is the index of `a·b`.
    table: Vec<Vec<usize>>,
    /// `matrices[q][i] = A_i(q)`
    matrices: Vec<Vec<IntMat>>,
}

impl HolonomySpec {
    /// Checks shapes and label consistency only.
    pub fn new(
        labels: Vec<String>,
        identity: usize,
        table: Vec<Vec<usize>>,
        matrices: Vec<Vec<IntMat>>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 || n > MAX_HOLONOMY_ORDER {
            return Err(Error::invalid(format!("holonomy order must lie in 1..={MAX_HOLONOMY_ORDER}, got {n}")));
        }
        if identity >= n {
            return Err(Error::invalid("identity label out of range"));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::invalid("multiplication table must be a square table over the labels"));
        }
        if matrices.len() != n {
            return Err(Error::invalid("one list of matrices per label is required"));
        }
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate label `{l}`")));
            }
        }
        Ok(HolonomySpec { labels, identity, table, matrices })
    }

    /// The trivial group acting trivially on every level.
    pub fn trivial(ranks: &[usize]) -> Self {
        HolonomySpec {
            labels: vec!["e".into()],
            identity: 0,
            table: vec![vec![0]],
            matrices: vec![ranks.iter().map(|&k| IntMat::identity(k)).collect()],
        }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, q: usize) -> &str {
        &self.labels[q]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// `A_i(q)`
    pub fn matrix(&self, q: usize, level: usize) -> &IntMat {
        &self.matrices[q][level]
    }

    pub fn matrices(&self, q: usize) -> &[IntMat] {
        &self.matrices[q]
    }

    /// Same group with `A_i(q)` replaced.
    pub fn with_matrix(&self, q: usize, level: usize, m: IntMat) -> Self {
        let mut h = self.clone();
        h.matrices[q][level] = m;
        h
    }

    /// Exhaustive group-axiom check of the multiplication table.
    pub fn group_axiom_violations(&self) -> Vec<String> {
        let n = self.order();
        let e = self.identity;
        let mut out = vec![];
        for a in 0..n {
            if self.table[e][a] != a || self.table[a][e] != a {
                out.push(format!("`{}` is not a two-sided identity for `{}`", self.labels[e], self.labels[a]));
            }
            if !(0..n).any(|b| self.table[a][b] == e && self.table[b][a] == e) {
                out.push(format!("`{}` has no inverse", self.labels[a]));
            }
        }
        let assoc_failure = (0..n).find_map(|a| {
            (0..n).find_map(|b| {
                (0..n).find_map(|c| {
                    let left = self.table[self.table[a][b]][c];
                    let right = self.table[a][self.table[b][c]];
                    (left != right).then_some((a, b, c))
                })
            })
        });
        if let Some((a, b, c)) = assoc_failure {
            out.push(format!(
                "multiplication is not associative: ({}{}){} != {}({}{})",
                self.labels[a], self.labels[b], self.labels[c], self.labels[a], self.labels[b], self.labels[c]
            ));
        }
        out
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order())
            .find(|&b| self.table[a][b] == self.identity)
            .expect("validated group has inverses")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfraSpec {
    pub tower: TowerSpec,
    pub holonomy: HolonomySpec,
}

impl InfraSpec {
    pub fn new(tower: TowerSpec, holonomy: HolonomySpec) -> Result<Self> {
        let c = tower.depth();
        for q in 0..holonomy.order() {
            let ms = holonomy.matrices(q);
            if ms.len() != c + 1 {
                return Err(Error::invalid(format!(
                    "label `{}`: expected {} holonomy matrices, got {}",
                    holonomy.label(q),
                    c + 1,
                    ms.len()
                )));
            }
            for (i, m) in ms.iter().enumerate() {
                if m.rows() != tower.rank(i) || m.cols() != tower.rank(i) {
                    return Err(Error::invalid(format!(
                        "A{}_{}: expected {}x{}, got {}x{}",
                        i,
                        holonomy.label(q),
                        tower.rank(i),
                        tower.rank(i),
                        m.rows(),
                        m.cols()
                    )));
                }
            }
        }
        Ok(InfraSpec { tower, holonomy })
    }

    /// A special solvmanifold viewed as an infra-solvmanifold with trivial holonomy.
    pub fn untwisted(tower: TowerSpec) -> Self {
        let holonomy = HolonomySpec::trivial(tower.ranks());
        InfraSpec { tower, holonomy }
    }

    /// Tower diagnostics, group axioms, unimodularity, `A_i(e) = I`, and the
    /// equivariance `A_i(q)·μ_i(e_t)·A_i(q)^{-1} = μ_i(A_0(q)·e_t)`.
    pub fn validate(&self) -> Vec<String> {
        let mut out = self.tower.validate();
        let h = &self.holonomy;
        out.extend(h.group_axiom_violations());
        for i in 0..=self.tower.depth() {
            if !h.matrix(h.identity(), i).is_identity() {
                out.push(format!("A{}_{} must be the identity", i, h.label(h.identity())));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for q in 0..h.order() {
            let mut inverses = Vec::with_capacity(self.tower.depth() + 1);
            for i in 0..=self.tower.depth() {
                let inv = h.matrix(q, i).inverse_unimodular();
                if inv.is_none() {
                    out.push(format!("A{}_{}: holonomy matrix not unimodular", i, h.label(q)));
                }
                inverses.push(inv);
            }
            if inverses.iter().any(Option::is_none) {
                continue;
            }
            let a0 = h.matrix(q, 0);
            for i in 1..=self.tower.depth() {
                let a = h.matrix(q, i);
                let a_inv = inverses[i].as_ref().unwrap();
                for t in 0..self.tower.base_rank() {
                    let lhs = a.mul(self.tower.action(i, t)).and_then(|x| x.mul(a_inv)).expect("sizes checked");
                    let rhs = self.tower.mu(i, &a0.col(t)).expect("valid tower");
                    if lhs != rhs {
                        out.push(format!(
                            "equivariance fails for `{}` at level {} on e_{}: A·M·A^-1 = {} but mu(A0·e) = {}",
                            h.label(q),
                            i,
                            t + 1,
                            lhs,
                            rhs
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let problems = self.validate();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(problems))
        }
    }
}

/// Spectral status of one level `i ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LevelStatus {
    /// Net, with a certificate.
    Net,
    /// NR holds, netness is not established.
    #[serde(rename = "NR-only")]
    NrOnly,
    /// Some `μ_i(v)` has a nontrivial root of unity as an eigenvalue.
    #[serde(rename = "NotNR")]
    NotNr,
    /// No certificate and no refutation within the searched box.
    Unknown,
}

impl fmt::Display for LevelStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelStatus::Net => "Net",
            LevelStatus::NrOnly => "NR-only",
            LevelStatus::NotNr => "NotNR",
            LevelStatus::Unknown => "Unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Every generator has 1 as its only eigenvalue.
    Unipotent,
    /// Every generator has only strictly positive real eigenvalues (Sturm count).
    PositiveRealSpectrum,
    /// `Φ_order` divides the characteristic polynomial of `μ_i(v)`.
    CyclotomicDivisor {
        #[serde(serialize_with = "crate::json::int_seq")]
        v: Vec<BigInt>,
        order: u64,
    },
    /// `k_0 = 1` and the generator has no root of unity other than 1 as an
    /// eigenvalue; this decides NR for every power.
    SingleGeneratorNr,
    /// `det μ_i(v) = -1`, so `-1` lies in the group generated by the eigenvalues.
    DeterminantMinusOne {
        #[serde(serialize_with = "crate::json::int_seq")]
        v: Vec<BigInt>,
    },
    /// Every `v` in `[-bound, bound]^{k_0}` was searched without a verdict.
    BoxExhausted { bound: u32 },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Unipotent => write!(f, "unipotent"),
            Certificate::PositiveRealSpectrum => write!(f, "positive-real-spectrum"),
            Certificate::CyclotomicDivisor { v, order } => {
                write!(f, "cyclotomic divisor of order {order} at v = {}", fmt_vec(v))
            }
            Certificate::SingleGeneratorNr => write!(f, "single generator without nontrivial roots of unity"),
            Certificate::DeterminantMinusOne { v } => write!(f, "det mu(v) = -1 at v = {} (not net)", fmt_vec(v)),
            Certificate::BoxExhausted { bound } => write!(f, "bounded-box exhaustion with bound {bound}"),
        }
    }
}

pub(crate) fn fmt_vec(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelVerdict {
    pub level: usize,
    pub status: LevelStatus,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetnessVerdict {
    pub box_bound: u32,
    pub levels: Vec<LevelVerdict>,
}

impl NetnessVerdict {
    /// Combined status over all levels; a tower without levels is net.
    pub fn overall(&self) -> LevelStatus {
        let has = |s| self.levels.iter().any(|l| l.status == s);
        if has(LevelStatus::NotNr) {
            LevelStatus::NotNr
        } else if has(LevelStatus::Unknown) {
            LevelStatus::Unknown
        } else if has(LevelStatus::NrOnly) {
            LevelStatus::NrOnly
        } else {
            LevelStatus::Net
        }
    }

    pub fn is_net(&self) -> bool {
        self.overall() == LevelStatus::Net
    }

    /// The first refutation, if any.
    pub fn witness(&self) -> Option<(usize, &[BigInt], u64)> {
        self.levels.iter().find_map(|l| match &l.certificate {
            Certificate::CyclotomicDivisor { v, order } if l.status == LevelStatus::NotNr => {
                Some((l.level, v.as_slice(), *order))
            }
            _ => None,
        })
    }
}

fn is_unipotent(m: &IntMat) -> bool {
    let n = m.rows() as u64;
    m.sub(&IntMat::identity(m.rows())).and_then(|x| x.pow(n)).is_ok_and(|x| x.is_zero())
}

/// Smallest cyclotomic order `d > 1` dividing the characteristic polynomial.
fn nontrivial_root_order(m: &IntMat) -> Option<u64> {
    let cp = char_poly(m).expect("square");
    cyclotomic_divisors(&cp).expect("monic, nonzero").into_iter().find(|&d| d > 1)
}

fn nr_level(tower: &TowerSpec, level: usize, bound: u32, exec: Execution) -> LevelVerdict {
    let gens = tower.generators(level);
    let verdict = |status, certificate| LevelVerdict { level, status, certificate };

    if tower.base_rank() == 1 {
        // λ^m a root of unity forces λ a root of unity, so v = 1 decides every power
        let v = vec![BigInt::one()];
        return match nontrivial_root_order(&gens[0]) {
            Some(order) => verdict(LevelStatus::NotNr, Certificate::CyclotomicDivisor { v, order }),
            None => verdict(LevelStatus::NrOnly, Certificate::SingleGeneratorNr),
        };
    }
    if gens.iter().all(is_unipotent) {
        return verdict(LevelStatus::NrOnly, Certificate::Unipotent);
    }
    if gens.iter().all(|g| all_roots_positive_real(&char_poly(g).expect("square"))) {
        return verdict(LevelStatus::NrOnly, Certificate::PositiveRealSpectrum);
    }
    let vectors = tower.box_vectors(bound);
    let witness = exec.find_map_first(&vectors, |v| {
        let m = tower.mu(level, v).ok()?;
        nontrivial_root_order(&m).map(|order| (v.clone(), order))
    });
    match witness {
        Some((v, order)) => verdict(LevelStatus::NotNr, Certificate::CyclotomicDivisor { v, order }),
        None => verdict(LevelStatus::Unknown, Certificate::BoxExhausted { bound }),
    }
}

/// Searches for nontrivial roots of unity among the eigenvalues of the
/// `μ_i(v)`. Levels where NR is established report [`LevelStatus::NrOnly`];
/// this check never asserts netness.
pub fn nr_check(tower: &TowerSpec, bound: u32) -> Result<NetnessVerdict> {
    nr_check_with(tower, bound, Execution::default())
}

pub fn nr_check_with(tower: &TowerSpec, bound: u32, exec: Execution) -> Result<NetnessVerdict> {
    tower.ensure_valid()?;
    let levels = (1..=tower.depth()).map(|i| nr_level(tower, i, bound, exec)).collect();
    Ok(NetnessVerdict { box_bound: bound, levels })
}

/// Net certificate per level: unipotent generators, or generators whose
/// spectra are strictly positive reals. Commuting matrices triangularise
/// simultaneously, so the eigenvalues of every `μ_i(v)` are then products of
/// powers of positive reals (resp. all 1), and the group they generate is
/// torsion-free. Refutations come from [`nr_check`].
pub fn netness_check(tower: &TowerSpec, bound: u32) -> Result<NetnessVerdict> {
    netness_check_with(tower, bound, Execution::default())
}

pub fn netness_check_with(tower: &TowerSpec, bound: u32, exec: Execution) -> Result<NetnessVerdict> {
    tower.ensure_valid()?;
    let levels = (1..=tower.depth())
        .map(|level| {
            let nr = nr_level(tower, level, bound, exec);
            if nr.status == LevelStatus::NotNr {
                return nr;
            }
            let gens = tower.generators(level);
            let verdict = |status, certificate| LevelVerdict { level, status, certificate };
            if gens.iter().all(is_unipotent) {
                return verdict(LevelStatus::Net, Certificate::Unipotent);
            }
            if gens.iter().all(|g| all_roots_positive_real(&char_poly(g).expect("square"))) {
                return verdict(LevelStatus::Net, Certificate::PositiveRealSpectrum);
            }
            let minus_one = BigInt::from(-1);
            if let Some(t) = gens.iter().position(|g| g.determinant().expect("square") == minus_one) {
                let mut v = vec![BigInt::zero(); tower.base_rank()];
                v[t] = BigInt::one();
                let status = if nr.status == LevelStatus::NrOnly { LevelStatus::NrOnly } else { LevelStatus::Unknown };
                return verdict(status, Certificate::DeterminantMinusOne { v });
            }
            nr
        })
        .collect();
    Ok(NetnessVerdict { box_bound: bound, levels })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ClosureStatus {
    /// `A_i(q1)·A_i(q2) = μ_i(v)·A_i(q1q2)` at every level `i ≥ 1` for this `v`.
    Verified {
        #[serde(serialize_with = "crate::json::int_seq")]
        v: Vec<BigInt>,
    },
    /// No common `v` in the box.
    Unverified { bound: u32 },
    /// `A_0` must be an honest homomorphism on `Q`; it is not for this pair.
    BaseLevelMismatch,
}

impl fmt::Display for ClosureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosureStatus::Verified { v } => write!(f, "closes with v = {}", fmt_vec(v)),
            ClosureStatus::Unverified { bound } => write!(f, "no v found in [-{bound}, {bound}]^k0"),
            ClosureStatus::BaseLevelMismatch => f.write_str("A_0 is not multiplicative"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureEntry {
    pub left: String,
    pub right: String,
    #[serde(flatten)]
    pub status: ClosureStatus,
}

/// For every pair of labels, looks for the element of `Γ` relating the
/// product of representatives to the representative of the product. The
/// same `v` is used for all levels since it comes from one group element.
pub fn holonomy_closure_check(spec: &InfraSpec, bound: u32) -> Result<Vec<ClosureEntry>> {
    holonomy_closure_check_with(spec, bound, Execution::default())
}

pub fn holonomy_closure_check_with(spec: &InfraSpec, bound: u32, exec: Execution) -> Result<Vec<ClosureEntry>> {
    spec.ensure_valid()?;
    let h = &spec.holonomy;
    let t = &spec.tower;
    let c = t.depth();
    let pairs: Vec<(usize, usize)> = (0..h.order()).flat_map(|a| (0..h.order()).map(move |b| (a, b))).collect();
    let vectors = t.box_vectors(bound);
    let entries = exec.map(&pairs, |&(a, b)| {
        let ab = h.product(a, b);
        let base_lhs = h.matrix(a, 0).mul(h.matrix(b, 0)).expect("sizes");
        let status = if &base_lhs != h.matrix(ab, 0) {
            ClosureStatus::BaseLevelMismatch
        } else {
            // targets: A_i(a)A_i(b)A_i(ab)^{-1} must equal μ_i(v)
            let targets: Vec<IntMat> = (1..=c)
                .map(|i| {
                    let prod = h.matrix(a, i).mul(h.matrix(b, i)).expect("sizes");
                    let inv = h.matrix(ab, i).inverse_unimodular().expect("validated");
                    prod.mul(&inv).expect("sizes")
                })
                .collect();
            let found = vectors.iter().find(|v| {
                targets.iter().enumerate().all(|(idx, target)| t.mu(idx + 1, v).map(|m| &m == target).unwrap_or(false))
            });
            match found {
                Some(v) => ClosureStatus::Verified { v: v.clone() },
                None => ClosureStatus::Unverified { bound },
            }
        };
        ClosureEntry { left: h.label(a).to_string(), right: h.label(b).to_string(), status }
    });
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMat {
        IntMat::from_rows(rows)
    }

    fn one_gen(mat: IntMat) -> TowerSpec {
        let k1 = mat.rows();
        TowerSpec::new(vec![1, k1], vec![vec![mat]]).unwrap()
    }

    fn sol() -> TowerSpec {
        one_gen(m(&[vec![2, 1], vec![1, 1]]))
    }

    #[test]
    fn validate_examples() {
        assert!(TowerSpec::torus(2).validate().is_empty());
        assert!(sol().validate().is_empty());
        let bad = one_gen(m(&[vec![2, 0], vec![0, 2]]));
        let problems = bad.validate();
        assert_eq!(problems.len(), 1);
        assert!(problems[0].contains("not unimodular"));
    }

    #[test]
    fn non_commuting_generators_reported() {
        let a = m(&[vec![1, 1], vec![0, 1]]);
        let b = m(&[vec![1, 0], vec![1, 1]]);
        let t = TowerSpec::new(vec![2, 2], vec![vec![a, b]]).unwrap();
        assert!(t.validate().iter().any(|p| p.contains("do not commute")));
    }

    #[test]
    fn shape_errors() {
        assert!(TowerSpec::new(vec![1, 2], vec![]).is_err());
        assert!(TowerSpec::new(vec![1, 2], vec![vec![IntMat::identity(3)]]).is_err());
    }

    #[test]
    fn mu_uses_inverses_for_negative_exponents() {
        let t = sol();
        let inv = t.mu(1, &[BigInt::from(-1)]).unwrap();
        assert_eq!(inv, m(&[vec![1, -1], vec![-1, 2]]));
        assert_eq!(t.mu(1, &[BigInt::from(2)]).unwrap(), m(&[vec![5, 3], vec![3, 2]]));
    }

    #[test]
    fn nr_examples() {
        let rot = one_gen(m(&[vec![0, -1], vec![1, 0]]));
        let v = nr_check(&rot, 3).unwrap();
        assert_eq!(v.overall(), LevelStatus::NotNr);
        assert_eq!(v.witness(), Some((1, &[BigInt::one()][..], 4)));

        let v = nr_check(&sol(), 3).unwrap();
        assert_eq!(v.overall(), LevelStatus::NrOnly);

        let uni = one_gen(m(&[vec![1, 1], vec![0, 1]]));
        assert_eq!(nr_check(&uni, 3).unwrap().levels[0].status, LevelStatus::NrOnly);
    }

    #[test]
    fn netness_examples() {
        let uni = one_gen(m(&[vec![1, 1], vec![0, 1]]));
        let v = netness_check(&uni, 3).unwrap();
        assert!(v.is_net());
        assert_eq!(v.levels[0].certificate, Certificate::Unipotent);

        let v = netness_check(&sol(), 3).unwrap();
        assert!(v.is_net());
        assert_eq!(v.levels[0].certificate, Certificate::PositiveRealSpectrum);

        let rot = one_gen(m(&[vec![0, -1], vec![1, 0]]));
        assert_eq!(netness_check(&rot, 3).unwrap().overall(), LevelStatus::NotNr);

        assert!(netness_check(&TowerSpec::torus(3), 3).unwrap().is_net());
    }

    #[test]
    fn fibonacci_action_is_nr_but_not_net() {
        // eigenvalues φ and -1/φ multiply to -1
        let fib = one_gen(m(&[vec![1, 1], vec![1, 0]]));
        let v = netness_check(&fib, 3).unwrap();
        assert_eq!(v.overall(), LevelStatus::NrOnly);
        assert!(matches!(v.levels[0].certificate, Certificate::DeterminantMinusOne { .. }));
    }

    #[test]
    fn box_search_finds_witness_for_two_generators() {
        // M1 = -I has eigenvalue -1; generators do not admit a certificate
        let a = m(&[vec![-1, 0], vec![0, -1]]);
        let b = m(&[vec![2, 1], vec![1, 1]]);
        let t = TowerSpec::new(vec![2, 2], vec![vec![a, b]]).unwrap();
        let v = nr_check(&t, 2).unwrap();
        assert_eq!(v.overall(), LevelStatus::NotNr);
        let (_, w, order) = v.witness().unwrap();
        assert_eq!(order, 2);
        assert_eq!(w, &[BigInt::from(-1), BigInt::zero()][..]);
    }

    #[test]
    fn box_ordering_starts_at_zero() {
        let vs = box_vectors(2, 1);
        assert_eq!(vs.len(), 9);
        assert!(vs[0].iter().all(Zero::is_zero));
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
    fn closure_examples() {
        let trivial = InfraSpec::untwisted(sol());
        let entries = holonomy_closure_check(&trivial, 3).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].status, ClosureStatus::Verified { v: vec![BigInt::zero()] });

        let entries = holonomy_closure_check(&klein(), 3).unwrap();
        assert!(entries.iter().all(|e| matches!(e.status, ClosureStatus::Verified { .. })));
    }

    #[test]
    fn sol_with_flip_holonomy() {
        // X M X^-1 = M^-1 with X an involution, A_0(b) = -1
        let x = m(&[vec![1, 0], vec![-1, -1]]);
        let h = HolonomySpec::new(
            vec!["e".into(), "b".into()],
            0,
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![IntMat::identity(1), IntMat::identity(2)], vec![IntMat::diag(&[-1]), x.clone()]],
        )
        .unwrap();
        let spec = InfraSpec::new(sol(), h).unwrap();
        assert!(spec.validate().is_empty(), "{:?}", spec.validate());
        let entries = holonomy_closure_check(&spec, 3).unwrap();
        assert!(entries.iter().all(|e| matches!(e.status, ClosureStatus::Verified { .. })));

        // representative X·M: (XM)^2 = X M X M = M^-1 M = I, still verified
        let xm = x.mul(&m(&[vec![2, 1], vec![1, 1]])).unwrap();
        let shifted = InfraSpec::new(sol(), spec.holonomy.with_matrix(1, 1, xm)).unwrap();
        assert!(shifted.validate().is_empty());
        let entries = holonomy_closure_check(&shifted, 3).unwrap();
        assert!(entries.iter().all(|e| matches!(e.status, ClosureStatus::Verified { .. })));

        // an action that does not intertwine is rejected
        let bad = InfraSpec::new(sol(), spec.holonomy.with_matrix(1, 1, IntMat::identity(2))).unwrap();
        assert!(bad.validate().iter().any(|p| p.contains("equivariance")));
    }

    #[test]
    fn broken_group_table() {
        let h = HolonomySpec::new(
            vec!["e".into(), "a".into(), "b".into()],
            0,
            vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 0, 1]],
            vec![vec![IntMat::identity(1)]; 3],
        )
        .unwrap();
        let spec = InfraSpec::new(TowerSpec::torus(1), h).unwrap();
        assert!(!spec.validate().is_empty());
    }

    #[test]
    fn nr_verdict_is_conjugation_invariant() {
        let p = m(&[vec![1, 2], vec![0, 1]]);
        let p_inv = p.inverse_unimodular().unwrap();
        for gen in [m(&[vec![0, -1], vec![1, 0]]), m(&[vec![2, 1], vec![1, 1]]), m(&[vec![1, 1], vec![0, 1]])] {
            let conj = p.mul(&gen).unwrap().mul(&p_inv).unwrap();
            assert_eq!(nr_check(&one_gen(gen), 3).unwrap(), nr_check(&one_gen(conj), 3).unwrap());
        }
    }

    #[test]
    fn single_generator_verdict_ignores_bound() {
        for gen in [m(&[vec![0, -1], vec![1, 0]]), m(&[vec![2, 1], vec![1, 1]]), m(&[vec![0, 1], vec![-1, 1]])] {
            let t = one_gen(gen);
            let a = nr_check(&t, 1).unwrap();
            let b = nr_check(&t, 5).unwrap();
            assert_eq!(a.levels, b.levels);
        }
    }
}
