use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use nielsen_core::exec::Execution;
use nielsen_core::linalg::{char_poly, cyclotomic, RatMat};
use nielsen_core::morphism::{index_product, restriction_invariance_check};
use nielsen_core::nielsen::{nvalued_nielsen_with, Condition2, projection_coincidence_with, single_valued_nielsen, solv_coincidence_with};
use nielsen_core::oracle::{coincidence_factor_orders, crosscheck_report, reidemeister_factor_checks, ReidemeisterOrder};
use nielsen_core::tower::{holonomy_closure_check_with, netness_check_with, Certificate, ClosureStatus, NetnessVerdict, DEFAULT_BOX_BOUND};
use nielsen_core::Error;

use crate::report::{Check, Details, Hypothesis, Report};
use crate::{exit, Command, ProblemFile};

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub box_bound: u32,
    /// Append cross-checks to the computation.
    pub oracle: bool,
    pub execution: Execution,
}

impl Default for Options {
    fn default() -> Self {
        Options { box_bound: DEFAULT_BOX_BOUND, oracle: false, execution: Execution::default() }
    }
}

#[derive(Debug)]
pub enum RunError {
    /// The file lacks what the command needs, or a module rejected the input.
    Semantic(String),
    /// Non-integral average or disagreeing computation paths.
    Computation(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Semantic(_) => exit::SEMANTIC,
            RunError::Computation(_) => exit::COMPUTATION,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Semantic(m) => write!(f, "semantic error: {m}"),
            RunError::Computation(m) => write!(f, "computation error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonIntegral { .. } | Error::Inconsistent(_) | Error::Singular(_) | Error::ZeroPolynomial => {
                RunError::Computation(e.to_string())
            }
            _ => RunError::Semantic(e.to_string()),
        }
    }
}

fn need_branches(file: &ProblemFile, cmd: Command) -> Result<(), RunError> {
    if file.branches.is_empty() {
        return Err(RunError::Semantic(format!("`{cmd}` needs at least one [branch j] section")));
    }
    Ok(())
}

pub fn run_command(cmd: Command, file: &ProblemFile, opts: &Options) -> Result<Report, RunError> {
    let mut report = Report::new(cmd, file.name.clone());
    let (bound, exec) = (opts.box_bound, opts.execution);
    match cmd {
        Command::Validate => validate(file, opts, &mut report)?,
        Command::Netness => {
            let verdict = netness_check_with(&file.tower, bound, exec)?;
            if opts.oracle {
                report.checks.extend(witness_checks(file, &verdict)?);
            }
            report.netness = Some(verdict);
        }
        Command::Coincidence => {
            need_branches(file, cmd)?;
            let input = file
                .coincidence_input()
                .ok_or_else(|| RunError::Semantic("`coincidence` needs a [coincidence] section".into()))?;
            let r = solv_coincidence_with(&input, bound, exec)?;
            if opts.oracle {
                let orders = coincidence_factor_orders(input.f.matrices(), input.g.matrices(), input.f.chain().bases())?;
                for (i, (order, factor)) in orders.iter().zip(&r.factors).enumerate() {
                    report.checks.push(order_check(format!("level {i}: |coker((G-F)B)|"), order, factor));
                }
            }
            report.netness = Some(netness_check_with(&file.tower, bound, exec)?);
            report.value = Some(r.value.clone());
            report.condition2 = Some(Hypothesis::Coincidence(r.condition2.clone()));
            if let Condition2::Unverified { .. } = &r.condition2 {
                report.warnings.push(format!("condition 2 {}", r.condition2));
            }
            report.details = Details::Coincidence(r);
        }
        Command::Projection => {
            need_branches(file, cmd)?;
            let f = file.branch(0).expect("branch 1");
            let p = projection_coincidence_with(&file.tower, &f, bound, exec)?;
            if opts.oracle {
                let ids: Vec<RatMat> = file.tower.ranks().iter().map(|&k| RatMat::identity(k)).collect();
                let orders = coincidence_factor_orders(f.matrices(), &ids, f.chain().bases())?;
                for (i, (order, factor)) in orders.iter().zip(&p.coincidence_factors).enumerate() {
                    report.checks.push(order_check(format!("level {i}: |coker(B-FB)|"), order, factor));
                }
            }
            report.netness = Some(netness_check_with(&file.tower, bound, exec)?);
            report.value = Some(p.value.clone());
            report.condition2 = Some(Hypothesis::Coincidence(p.condition2.clone()));
            report.details = Details::Projection(p);
        }
        Command::Nielsen | Command::Oracle => {
            need_branches(file, cmd)?;
            let input = file.nvalued_input()?;
            let r = if input.n() == 1 {
                single_valued_nielsen(&input, bound)?
            } else {
                nvalued_nielsen_with(&input, bound, exec)?
            };
            if cmd == Command::Oracle || opts.oracle {
                let averaging = crosscheck_report(&input, &r, bound, exec)?;
                report.checks.push(Check::new(
                    "averaging crosscheck",
                    averaging.agree,
                    format!("{} recomputed on the chain scaled by 2 vs {}", averaging.recomputed, averaging.nielsen),
                ));
                let factors = reidemeister_factor_checks(&input, &r)?;
                for c in &factors {
                    report.checks.push(Check::new(
                        format!("reidemeister branch {} label {} level {}", c.branch, c.label, c.level),
                        c.pass,
                        format!("|det| = {}, |coker| = {} over index {}", c.factor, c.reidemeister, c.chain_index),
                    ));
                }
                if cmd == Command::Oracle {
                    report.details = Details::Oracle { averaging, factors };
                }
            }
            if cmd == Command::Nielsen {
                report.details = Details::Nielsen {
                    n: input.n(),
                    holonomy_order: input.infra.holonomy.order(),
                    conditional: r.conditional,
                    keppelmann_mccord: r.keppelmann_mccord.clone(),
                };
            }
            report.value = Some(r.value);
            report.terms = r.terms;
            report.condition2 = Some(Hypothesis::Averaging(r.independence));
            report.integrality = Some(r.integrality);
            report.netness = Some(r.netness);
            report.warnings = r.warnings;
        }
    }
    Ok(report)
}

fn order_check(name: String, order: &ReidemeisterOrder, factor: &BigInt) -> Check {
    let pass = match order.finite() {
        Some(n) => n == factor,
        None => factor.is_zero(),
    };
    Check::new(name, pass, format!("{order} vs |det| = {factor}"))
}

/// Re-derives each cyclotomic witness by dividing the characteristic polynomial.
fn witness_checks(file: &ProblemFile, verdict: &NetnessVerdict) -> Result<Vec<Check>, RunError> {
    let mut out = vec![];
    for l in &verdict.levels {
        if let Certificate::CyclotomicDivisor { v, order } = &l.certificate {
            let m = file.tower.mu(l.level, v)?;
            let divides = char_poly(&m)?.is_divisible_by_monic(&cyclotomic(*order as usize));
            out.push(Check::new(
                format!("level {} witness", l.level),
                divides,
                format!("Φ_{order} divides the characteristic polynomial of μ(v)"),
            ));
        }
    }
    Ok(out)
}

fn validate(file: &ProblemFile, opts: &Options, report: &mut Report) -> Result<(), RunError> {
    let t = &file.tower;
    report.checks.push(Check::new(
        "tower",
        true,
        format!("c = {}, ranks {:?}, commuting unimodular generators", t.depth(), t.ranks()),
    ));
    let infra = file.infra();
    report.checks.push(Check::new(
        "holonomy",
        true,
        format!("|Q| = {}, group axioms, unimodularity and equivariance", infra.holonomy.order()),
    ));
    let closure = holonomy_closure_check_with(&infra, opts.box_bound, opts.execution)?;
    for e in &closure {
        match &e.status {
            ClosureStatus::Verified { .. } => {}
            ClosureStatus::Unverified { bound } => report.warnings.push(format!(
                "no v in [-{bound}, {bound}]^k0 relates A({})A({}) to A({}{})",
                e.left, e.right, e.left, e.right
            )),
            ClosureStatus::BaseLevelMismatch => {
                report.checks.push(Check::new(
                    format!("closure {}·{}", e.left, e.right),
                    false,
                    "A_0 is not a homomorphism on this pair",
                ));
            }
        }
    }
    let chain = file.chain_or_identity();
    report.checks.push(Check::new("chain", true, format!("index {}", index_product(&chain)?)));
    for j in 0..file.branches.len() {
        let f = file.branch(j).expect("in range");
        report.checks.push(Check::new(format!("branch {}", j + 1), true, "integrality and compatibility"));
        for s in [2, 3] {
            let ok = restriction_invariance_check(&f, &chain.scaled(s))?;
            report.checks.push(Check::new(
                format!("branch {} restriction x{s}", j + 1),
                ok,
                "linearisation unchanged on the scaled chain",
            ));
        }
    }
    if file.coincidence.is_some() {
        report.checks.push(Check::new("coincidence map", true, "integrality and compatibility"));
    }
    if file.sigma.is_some() {
        report.checks.push(Check::new("sigma", true, "homomorphism Q -> S_n"));
    }
    report.details = Details::Validate { closure };
    Ok(())
}
