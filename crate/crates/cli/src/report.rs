//! Reports and their two renderings.
//!
//! The structured rendering is a JSON object with the keys `command`, `name`,
//! `value`, `terms`, `netness`, `condition2`, `integrality`, `warnings`,
//! `details` and `checks`, always present and in that order; keys that do not
//! apply to a command are `null` (or empty lists). Integers are written as
//! exact JSON numbers of any size, non-integral rationals as `"p/q"` strings.

use std::fmt::Write as _;

use clap::ValueEnum;
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Map, Value};

use nielsen_core::nielsen::{Condition2, IndependenceSummary, Integrality, ProjectionCoincidence, SolvCoincidence, Term};
use nielsen_core::oracle::{AveragingCrosscheck, FactorCheck};
use nielsen_core::tower::{ClosureEntry, NetnessVerdict};

use crate::{exit, Command};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Hypothesis {
    Coincidence(Condition2),
    Averaging(IndependenceSummary),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Details {
    None,
    Validate { closure: Vec<ClosureEntry> },
    Coincidence(SolvCoincidence),
    Projection(ProjectionCoincidence),
    Nielsen {
        n: usize,
        holonomy_order: usize,
        conditional: bool,
        #[serde(serialize_with = "opt_number")]
        keppelmann_mccord: Option<BigInt>,
    },
    Oracle { averaging: AveragingCrosscheck, factors: Vec<FactorCheck> },
}

fn number(x: &BigInt) -> Value {
    Value::Number(x.to_string().parse().expect("integer literal"))
}

fn opt_number<S: serde::Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    x.as_ref().map(number).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub command: Command,
    pub name: Option<String>,
    pub value: Option<BigInt>,
    pub terms: Vec<Term>,
    pub netness: Option<NetnessVerdict>,
    pub condition2: Option<Hypothesis>,
    pub integrality: Option<Integrality>,
    pub warnings: Vec<String>,
    pub details: Details,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: Command, name: Option<String>) -> Self {
        Report {
            command,
            name,
            value: None,
            terms: vec![],
            netness: None,
            condition2: None,
            integrality: None,
            warnings: vec![],
            details: Details::None,
            checks: vec![],
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Process status for a completed run: failed `validate` checks are
    /// semantic errors, any other failed check is an oracle mismatch.
    pub fn exit_status(&self) -> i32 {
        if self.all_checks_pass() {
            exit::SUCCESS
        } else if self.command == Command::Validate {
            exit::SEMANTIC
        } else {
            exit::ORACLE_MISMATCH
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command.name()));
        m.insert("name".into(), json!(self.name));
        m.insert("value".into(), self.value.as_ref().map_or(Value::Null, number));
        m.insert("terms".into(), to(&self.terms));
        m.insert(
            "netness".into(),
            match &self.netness {
                None => Value::Null,
                Some(n) => {
                    let mut v = to(n);
                    v.as_object_mut().expect("object").insert("overall".into(), json!(n.overall()));
                    v
                }
            },
        );
        m.insert("condition2".into(), to(&self.condition2));
        m.insert("integrality".into(), to(&self.integrality));
        m.insert("warnings".into(), json!(self.warnings));
        m.insert("details".into(), if self.details == Details::None { Value::Null } else { to(&self.details) });
        m.insert("checks".into(), to(&self.checks));
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k:<14}{v}");
        };
        if let Some(name) = &self.name {
            row("problem", name);
        }
        row("command", &self.command);
        if let Some(v) = &self.value {
            row("value", v);
        }
        match &self.details {
            Details::None | Details::Validate { .. } | Details::Oracle { .. } => {}
            Details::Coincidence(c) => row("factors", &join(&c.factors)),
            Details::Projection(p) => {
                row("index", &p.index);
                row("|det(I-F_i)|", &join(&p.factors));
                row("|det(B-FB)|", &join(&p.coincidence_factors));
                row("paths", &format!("{} = {} ({})", p.value, p.coincidence_value, if p.paths_agree { "agree" } else { "DISAGREE" }));
            }
            Details::Nielsen { n, holonomy_order, keppelmann_mccord, .. } => {
                row("branches", n);
                row("|Q|", holonomy_order);
                if let Some(km) = keppelmann_mccord {
                    row("Π|det(I-F_i)|", km);
                }
            }
        }
        if let Some(i) = &self.integrality {
            let verdict = if i.integral { "integral" } else { "NOT integral" };
            row("raw sum", &format!("{} / {} ({verdict})", i.raw_sum, i.divisor));
        }
        if let Some(h) = &self.condition2 {
            let text = match h {
                Hypothesis::Coincidence(c) => c.to_string(),
                Hypothesis::Averaging(s) => match s {
                    IndependenceSummary::NotRequired => "not required".into(),
                    IndependenceSummary::Certified => "certified".into(),
                    IndependenceSummary::BoxVerified { bound } => format!("box-verified (bound {bound})"),
                    IndependenceSummary::Unverified { branch, label, detail } => {
                        format!("branch {branch}, label {label}: {detail}")
                    }
                },
            };
            row("condition 2", &text);
        }
        if let Some(n) = &self.netness {
            row("netness", &n.overall());
            for l in &n.levels {
                row(&format!("  level {}", l.level), &format!("{} ({})", l.status, l.certificate));
            }
        }
        if let Details::Validate { closure } = &self.details {
            for e in closure {
                row(&format!("  {}·{}", e.left, e.right), &e.status);
            }
        }

        if !self.terms.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "{:>6}  {:<8}  {:<24}  product", "branch", "label", "|det(I - A_i(q)F_i)|");
            for t in &self.terms {
                let _ = writeln!(out, "{:>6}  {:<8}  {:<24}  {}", t.branch, t.label, join(&t.level_factors), t.product);
            }
        }
        if let Details::Oracle { averaging, .. } = &self.details {
            let _ = writeln!(out);
            let _ = writeln!(out, "{:>6}  {:<8}  N(αf_j, q) on chain x2 (index {})", "branch", "label", averaging.refined_index);
            for t in &averaging.terms {
                let _ = writeln!(out, "{:>6}  {:<8}  {}", t.branch, t.label, t.value);
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(out);
            for c in &self.checks {
                let _ = writeln!(out, "{}  {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
        }
        let _ = writeln!(out);
        if self.warnings.is_empty() {
            let _ = writeln!(out, "warnings: none");
        } else {
            for w in &self.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
        }
        out
    }
}

fn to<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" · ")
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Text => r.to_text(),
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(&r.to_json()).expect("serializable");
            s.push('\n');
            s
        }
    }
}
