//! Problem files: a line-oriented format with `[section]` headers,
//! `key = value` lines and `#` comments.
//!
//! ```text
//! [meta]
//! name = sol
//!
//! [tower]
//! c = 1
//! k0 = 1
//! k1 = 2
//! M1_1 = [[2, 1], [1, 1]]
//!
//! [branch 1]
//! F0 = [[-1]]
//! F1 = [[0, 1], [-1, 0]]
//! ```
//!
//! Sections are `[meta]`, `[tower]`, `[holonomy]`, `[chain]`,
//! `[branch j]` (`j = 1..n`) and `[coincidence]`. Matrix entries are
//! integers or rationals `p/q` with `q > 0`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use nielsen_core::linalg::{IntMat, RatMat};
use nielsen_core::morphism::{SublatticeChain, TowerMorphism};
use nielsen_core::nielsen::{CoincidenceInput, NValuedInput};
use nielsen_core::tower::{HolonomySpec, InfraSpec, TowerSpec};

use crate::Command;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemError {
    Syntax { line: usize, col: usize, message: String },
    Semantic(Vec<String>),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::Syntax { line, col, message } => {
                write!(f, "syntax error at line {line}, column {col}: {message}")
            }
            ProblemError::Semantic(problems) => write!(f, "semantic error: {}", problems.join("; ")),
        }
    }
}

impl std::error::Error for ProblemError {}

fn syntax<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ProblemError> {
    Err(ProblemError::Syntax { line, col, message: message.into() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub command: Option<Command>,
    pub tower: TowerSpec,
    pub holonomy: Option<HolonomySpec>,
    /// Zero-based images of each branch, one row per label.
    pub sigma: Option<Vec<Vec<usize>>>,
    pub chain: Option<SublatticeChain>,
    pub branches: Vec<Vec<RatMat>>,
    pub coincidence: Option<Vec<RatMat>>,
}

#[derive(Clone, Debug)]
enum Node {
    Atom(String),
    List(Vec<Value>),
}

#[derive(Clone, Debug)]
struct Value {
    node: Node,
    line: usize,
    col: usize,
}

impl Value {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ProblemError> {
        syntax(self.line, self.col, message)
    }

    fn atom(&self) -> Result<&str, ProblemError> {
        match &self.node {
            Node::Atom(s) => Ok(s),
            Node::List(_) => self.err("expected a single value, found a list"),
        }
    }

    fn list(&self) -> Result<&[Value], ProblemError> {
        match &self.node {
            Node::List(items) => Ok(items),
            Node::Atom(_) => self.err("expected a bracketed list"),
        }
    }

    /// A bare atom or a top-level list written with or without brackets.
    fn items(&self) -> Vec<&Value> {
        match &self.node {
            Node::List(items) => items.iter().collect(),
            Node::Atom(_) => vec![self],
        }
    }

    fn rational(&self) -> Result<BigRational, ProblemError> {
        let s = self.atom()?;
        let parse = |t: &str| BigInt::from_str(t).ok();
        let (p, q) = match s.split_once('/') {
            None => (parse(s), Some(BigInt::from(1))),
            Some((p, q)) if !q.starts_with(['-', '+']) => (parse(p), parse(q)),
            Some(_) => return self.err(format!("`{s}`: denominator must be a positive integer")),
        };
        match (p, q) {
            (Some(p), Some(q)) if q.is_positive() => Ok(BigRational::new(p, q)),
            (Some(_), Some(_)) => self.err(format!("`{s}`: denominator must be positive")),
            _ => self.err(format!("`{s}` is not an integer or rational p/q")),
        }
    }

    fn usize(&self) -> Result<usize, ProblemError> {
        let s = self.atom()?;
        s.parse().or_else(|_| self.err(format!("`{s}` is not a non-negative integer")))
    }

    fn rat_rows(&self) -> Result<Vec<Vec<BigRational>>, ProblemError> {
        let rows = self.list()?;
        let out: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.list()?.iter().map(Value::rational).collect())
            .collect::<Result<_, _>>()?;
        if out.is_empty() || out[0].is_empty() {
            return self.err("empty matrix");
        }
        if out.iter().any(|r| r.len() != out[0].len()) {
            return self.err("matrix rows have different lengths");
        }
        Ok(out)
    }

    fn rat_matrix(&self) -> Result<RatMat, ProblemError> {
        let rows = self.rat_rows()?;
        let (r, c) = (rows.len(), rows[0].len());
        Ok(RatMat::new(r, c, rows.into_iter().flatten().collect()).expect("rectangular"))
    }

    fn int_matrix(&self) -> Result<IntMat, ProblemError> {
        let rows = self.rat_rows()?;
        if rows.iter().flatten().any(|x| !x.is_integer()) {
            return self.err("matrix must have integer entries");
        }
        let (r, c) = (rows.len(), rows[0].len());
        Ok(IntMat::new(r, c, rows.into_iter().flatten().map(|x| x.to_integer()).collect()).expect("rectangular"))
    }
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    at: usize,
    line: usize,
    text: &'a str,
}

impl Cursor<'_> {
    fn col(&self) -> usize {
        self.chars.get(self.at).map_or(self.text.chars().count() + 1, |&(c, _)| c + 1)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.at).is_some_and(|(_, c)| c.is_whitespace()) {
            self.at += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn value(&mut self) -> Result<Value, ProblemError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col());
        match self.peek() {
            Some('[') => {
                self.at += 1;
                let mut items = vec![];
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.at += 1;
                    return Ok(Value { node: Node::List(items), line, col });
                }
                loop {
                    items.push(self.value()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.at += 1,
                        Some(']') => {
                            self.at += 1;
                            return Ok(Value { node: Node::List(items), line, col });
                        }
                        Some(c) => return syntax(line, self.col(), format!("expected `,` or `]`, found `{c}`")),
                        None => return syntax(line, self.col(), "unclosed `[`"),
                    }
                }
            }
            Some(c) if is_atom_char(c) => {
                let start = self.at;
                while self.peek().is_some_and(is_atom_char) {
                    self.at += 1;
                }
                let s: String = self.chars[start..self.at].iter().map(|&(_, c)| c).collect();
                Ok(Value { node: Node::Atom(s), line, col })
            }
            Some(c) => syntax(line, col, format!("unexpected `{c}`")),
            None => syntax(line, col, "missing value"),
        }
    }

    /// Whole right-hand side; a bare comma-separated sequence becomes a list.
    fn rhs(&mut self) -> Result<Value, ProblemError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col());
        let first = self.value()?;
        self.skip_ws();
        if self.peek().is_none() {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek() == Some(',') {
            self.at += 1;
            items.push(self.value()?);
            self.skip_ws();
        }
        match self.peek() {
            None => Ok(Value { node: Node::List(items), line, col }),
            Some(c) => syntax(line, self.col(), format!("unexpected `{c}` after value")),
        }
    }
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '+' | '/' | '.')
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Meta,
    Tower,
    Holonomy,
    Chain,
    Branch(usize),
    Coincidence,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Section::Meta => write!(f, "[meta]"),
            Section::Tower => write!(f, "[tower]"),
            Section::Holonomy => write!(f, "[holonomy]"),
            Section::Chain => write!(f, "[chain]"),
            Section::Branch(j) => write!(f, "[branch {j}]"),
            Section::Coincidence => write!(f, "[coincidence]"),
        }
    }
}

type Entries = BTreeMap<String, Value>;

fn header(inner: &str, line: usize, col: usize) -> Result<Section, ProblemError> {
    let words: Vec<&str> = inner.split_whitespace().collect();
    Ok(match words.as_slice() {
        ["meta"] => Section::Meta,
        ["tower"] => Section::Tower,
        ["holonomy"] => Section::Holonomy,
        ["chain"] => Section::Chain,
        ["coincidence"] => Section::Coincidence,
        ["branch", j] => match j.parse::<usize>() {
            Ok(j) if j >= 1 => Section::Branch(j),
            _ => return syntax(line, col, format!("branch number must be a positive integer, found `{j}`")),
        },
        _ => return syntax(line, col, format!("unknown section `[{}]`", inner.trim())),
    })
}

fn lex(text: &str) -> Result<BTreeMap<Section, Entries>, ProblemError> {
    let mut sections: BTreeMap<Section, Entries> = BTreeMap::new();
    let mut current: Option<Section> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.chars().take_while(|c| c.is_whitespace()).count() + 1;
        if trimmed.starts_with('[') && !trimmed.contains('=') {
            let Some(inner) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) else {
                return syntax(line, indent + trimmed.chars().count(), "section header must end with `]`");
            };
            let section = header(inner, line, indent)?;
            if sections.contains_key(&section) {
                return syntax(line, indent, format!("duplicate section {section}"));
            }
            sections.insert(section.clone(), Entries::new());
            current = Some(section);
            continue;
        }
        let Some(eq) = content.find('=') else {
            return syntax(line, indent, "expected `key = value` or a `[section]` header");
        };
        let key = content[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return syntax(line, indent, format!("invalid key `{key}`"));
        }
        let Some(section) = &current else {
            return syntax(line, indent, format!("`{key}` appears before any section header"));
        };
        let offset = content[..=eq].chars().count();
        let mut cursor = Cursor {
            chars: content[eq + 1..].chars().enumerate().map(|(i, c)| (i + offset, c)).collect(),
            at: 0,
            line,
            text: content,
        };
        let value = cursor.rhs()?;
        let entries = sections.get_mut(section).expect("opened");
        if entries.insert(key.to_string(), value).is_some() {
            return syntax(line, indent, format!("duplicate key `{key}` in {section}"));
        }
    }
    Ok(sections)
}

/// Takes keys out of a section, leaving unknown ones behind for reporting.
struct Take<'a> {
    section: Section,
    entries: Entries,
    problems: &'a mut Vec<String>,
}

impl Take<'_> {
    fn get(&mut self, key: &str) -> Option<Value> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Option<Value> {
        let v = self.entries.remove(key);
        if v.is_none() {
            self.problems.push(format!("{} is missing `{key}`", self.section));
        }
        v
    }

    fn finish(self) {
        for key in self.entries.keys() {
            self.problems.push(format!("unknown key `{key}` in {}", self.section));
        }
    }
}

fn expect_size<M>(m: M, rows: usize, cols: usize, what: &str, actual: (usize, usize), problems: &mut Vec<String>) -> Option<M> {
    if actual == (rows, cols) {
        Some(m)
    } else {
        problems.push(format!("{what} must be {rows}x{cols}, found {}x{}", actual.0, actual.1));
        None
    }
}

pub fn parse_spec(text: &str) -> Result<ProblemFile, ProblemError> {
    let mut sections = lex(text)?;
    let mut problems = vec![];

    let (name, command) = match sections.remove(&Section::Meta) {
        None => (None, None),
        Some(entries) => {
            let mut t = Take { section: Section::Meta, entries, problems: &mut problems };
            let name = t.get("name").map(|v| v.atom().map(str::to_string)).transpose()?;
            let command = match t.get("command") {
                None => None,
                Some(v) => match Command::from_str(v.atom()?) {
                    Ok(c) => Some(c),
                    Err(e) => return v.err(e),
                },
            };
            t.finish();
            (name, command)
        }
    };

    let Some(entries) = sections.remove(&Section::Tower) else {
        return Err(ProblemError::Semantic(vec!["missing [tower] section".into()]));
    };
    let mut t = Take { section: Section::Tower, entries, problems: &mut problems };
    let c = match t.require("c") {
        Some(v) => v.usize()?,
        None => return Err(ProblemError::Semantic(problems)),
    };
    let mut ranks = Vec::with_capacity(c + 1);
    for i in 0..=c {
        match t.require(&format!("k{i}")) {
            Some(v) => {
                let k = v.usize()?;
                if k == 0 {
                    return v.err(format!("k{i} must be positive"));
                }
                ranks.push(k);
            }
            None => ranks.push(0),
        }
    }
    let mut actions = vec![];
    for i in 1..=c {
        let mut level = vec![];
        for s in 1..=ranks[0] {
            let key = format!("M{i}_{s}");
            if let Some(v) = t.require(&key) {
                let m = v.int_matrix()?;
                let shape = (m.rows(), m.cols());
                level.extend(expect_size(m, ranks[i], ranks[i], &key, shape, t.problems));
            }
        }
        actions.push(level);
    }
    t.finish();
    if !problems.is_empty() {
        return Err(ProblemError::Semantic(problems));
    }
    let tower = TowerSpec::new(ranks.clone(), actions).map_err(|e| ProblemError::Semantic(vec![e.to_string()]))?;
    problems.extend(tower.validate());

    let mut sigma = None;
    let holonomy = match sections.remove(&Section::Holonomy) {
        None => None,
        Some(entries) => {
            let mut t = Take { section: Section::Holonomy, entries, problems: &mut problems };
            let labels: Vec<String> = match t.require("labels") {
                Some(v) => v.items().into_iter().map(|x| x.atom().map(str::to_string)).collect::<Result<_, _>>()?,
                None => vec![],
            };
            let index = |v: &Value| -> Result<usize, ProblemError> {
                let s = v.atom()?;
                labels.iter().position(|l| l == s).map_or_else(|| v.err(format!("unknown label `{s}`")), Ok)
            };
            let identity = match t.get("identity") {
                Some(v) => index(&v)?,
                None => 0,
            };
            let table: Vec<Vec<usize>> = match t.require("table") {
                Some(v) => v.list()?.iter().map(|row| row.list()?.iter().map(index).collect()).collect::<Result<_, _>>()?,
                None => vec![],
            };
            let mut matrices = vec![];
            for (q, label) in labels.iter().enumerate() {
                let mut per_level = vec![];
                for (i, &k) in ranks.iter().enumerate() {
                    let key = format!("A{i}_{label}");
                    let m = match if q == identity { t.get(&key) } else { t.require(&key) } {
                        Some(v) => {
                            let m = v.int_matrix()?;
                            let shape = (m.rows(), m.cols());
                            expect_size(m, k, k, &key, shape, t.problems)
                        }
                        None if q == identity => Some(IntMat::identity(k)),
                        None => None,
                    };
                    per_level.extend(m);
                }
                matrices.push(per_level);
            }
            let mut perms = vec![];
            for label in &labels {
                if let Some(v) = t.get(&format!("sigma_{label}")) {
                    let p = v
                        .list()?
                        .iter()
                        .map(|x| match x.usize()? {
                            0 => x.err("sigma entries are 1-based"),
                            j => Ok(j - 1),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    perms.push(p);
                }
            }
            if !perms.is_empty() {
                if perms.len() == labels.len() {
                    sigma = Some(perms);
                } else {
                    t.problems.push("sigma must be given for every label or for none".into());
                }
            }
            t.finish();
            if !problems.is_empty() {
                return Err(ProblemError::Semantic(problems));
            }
            match HolonomySpec::new(labels, identity, table, matrices) {
                Ok(h) => Some(h),
                Err(e) => return Err(ProblemError::Semantic(vec![e.to_string()])),
            }
        }
    };
    let infra = match &holonomy {
        Some(h) => match InfraSpec::new(tower.clone(), h.clone()) {
            Ok(s) => Some(s),
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        },
        None => Some(InfraSpec::untwisted(tower.clone())),
    };
    if let (Some(infra), Some(_)) = (&infra, &holonomy) {
        problems.extend(infra.validate().into_iter().filter(|p| !tower.validate().contains(p)));
    }

    let chain = match sections.remove(&Section::Chain) {
        None => None,
        Some(entries) => {
            let mut t = Take { section: Section::Chain, entries, problems: &mut problems };
            let mut bases = vec![];
            for (i, &k) in ranks.iter().enumerate() {
                let key = format!("B{i}");
                let b = match t.get(&key) {
                    Some(v) => {
                        let m = v.int_matrix()?;
                        let shape = (m.rows(), m.cols());
                        expect_size(m, k, k, &key, shape, t.problems)
                    }
                    None => Some(IntMat::identity(k)),
                };
                bases.extend(b);
            }
            t.finish();
            if bases.len() != ranks.len() {
                None
            } else {
                match SublatticeChain::new(bases) {
                    Ok(ch) => Some(ch),
                    Err(e) => {
                        problems.push(format!("chain: {e}"));
                        None
                    }
                }
            }
        }
    };

    let mut maps = |section: Section, letter: char, problems: &mut Vec<String>| -> Result<Option<Vec<RatMat>>, ProblemError> {
        let Some(entries) = sections.remove(&section) else {
            return Ok(None);
        };
        let mut t = Take { section, entries, problems };
        let mut out = vec![];
        for (i, &k) in ranks.iter().enumerate() {
            let key = format!("{letter}{i}");
            if let Some(v) = t.require(&key) {
                let m = v.rat_matrix()?;
                let shape = (m.rows(), m.cols());
                out.extend(expect_size(m, k, k, &key, shape, t.problems));
            }
        }
        t.finish();
        Ok(Some(out))
    };
    let mut branches = vec![];
    let mut j = 1;
    while let Some(fs) = maps(Section::Branch(j), 'F', &mut problems)? {
        branches.push(fs);
        j += 1;
    }
    let coincidence = maps(Section::Coincidence, 'G', &mut problems)?;
    for s in sections.keys() {
        problems.push(format!("{s} without the preceding branches"));
    }

    if problems.is_empty() {
        let chain_or_id = chain.clone().unwrap_or_else(|| SublatticeChain::identity(&ranks));
        let morphism = |fs: &[RatMat], what: String, problems: &mut Vec<String>| {
            match TowerMorphism::new(chain_or_id.clone(), fs.to_vec()) {
                Ok(m) => match m.validate(&tower) {
                    Ok(ps) => problems.extend(ps.into_iter().map(|p| format!("{what}: {p}"))),
                    Err(e) => problems.push(format!("{what}: {e}")),
                },
                Err(e) => problems.push(format!("{what}: {e}")),
            }
        };
        for (j, fs) in branches.iter().enumerate() {
            morphism(fs, format!("branch {}", j + 1), &mut problems);
        }
        if let Some(gs) = &coincidence {
            morphism(gs, "coincidence map".into(), &mut problems);
        }
    }
    if let (Some(perms), true) = (&sigma, problems.is_empty()) {
        let n = branches.len();
        if perms.iter().any(|p| p.len() != n) {
            problems.push(format!("each sigma must permute the {n} branches"));
        }
    }
    if !problems.is_empty() {
        return Err(ProblemError::Semantic(problems));
    }

    let file = ProblemFile { name, command, tower, holonomy, sigma, chain, branches, coincidence };
    if !file.branches.is_empty() {
        file.nvalued_input().map_err(|e| ProblemError::Semantic(vec![e.to_string()]))?;
    }
    Ok(file)
}

impl ProblemFile {
    pub fn infra(&self) -> InfraSpec {
        match &self.holonomy {
            Some(h) => InfraSpec::new(self.tower.clone(), h.clone()).expect("validated"),
            None => InfraSpec::untwisted(self.tower.clone()),
        }
    }

    pub fn chain_or_identity(&self) -> SublatticeChain {
        self.chain.clone().unwrap_or_else(|| SublatticeChain::identity(self.tower.ranks()))
    }

    pub fn branch(&self, j: usize) -> Option<TowerMorphism> {
        let fs = self.branches.get(j)?;
        Some(TowerMorphism::new(self.chain_or_identity(), fs.clone()).expect("validated"))
    }

    pub fn coincidence_input(&self) -> Option<CoincidenceInput> {
        let f = self.branch(0)?;
        let g = TowerMorphism::new(self.chain_or_identity(), self.coincidence.clone()?).expect("validated");
        Some(CoincidenceInput::new(self.tower.clone(), f, g).expect("validated"))
    }

    pub fn nvalued_input(&self) -> nielsen_core::Result<NValuedInput> {
        let chain = self.chain_or_identity();
        let branches = (0..self.branches.len())
            .map(|j| TowerMorphism::new(chain.clone(), self.branches[j].clone()))
            .collect::<nielsen_core::Result<Vec<_>>>()?;
        NValuedInput::new(self.infra(), chain, branches, self.sigma.clone())
    }

    /// Canonical text: fixed section and key order, every level written out.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        if self.name.is_some() || self.command.is_some() {
            out.push_str("[meta]\n");
            if let Some(name) = &self.name {
                let _ = writeln!(out, "name = {name}");
            }
            if let Some(cmd) = self.command {
                let _ = writeln!(out, "command = {cmd}");
            }
            out.push('\n');
        }
        let t = &self.tower;
        let _ = writeln!(out, "[tower]\nc = {}", t.depth());
        for (i, k) in t.ranks().iter().enumerate() {
            let _ = writeln!(out, "k{i} = {k}");
        }
        for i in 1..=t.depth() {
            for (s, m) in t.generators(i).iter().enumerate() {
                let _ = writeln!(out, "M{i}_{} = {m}", s + 1);
            }
        }
        if let Some(h) = &self.holonomy {
            let _ = writeln!(out, "\n[holonomy]\nlabels = {}", h.labels().join(", "));
            let _ = writeln!(out, "identity = {}", h.label(h.identity()));
            let rows: Vec<String> = h
                .table()
                .iter()
                .map(|row| format!("[{}]", row.iter().map(|&x| h.label(x)).collect::<Vec<_>>().join(", ")))
                .collect();
            let _ = writeln!(out, "table = [{}]", rows.join(", "));
            for q in 0..h.order() {
                for (i, m) in h.matrices(q).iter().enumerate() {
                    let _ = writeln!(out, "A{i}_{} = {m}", h.label(q));
                }
            }
            if let Some(perms) = &self.sigma {
                for (q, p) in perms.iter().enumerate() {
                    let one_based: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
                    let _ = writeln!(out, "sigma_{} = [{}]", h.label(q), one_based.join(", "));
                }
            }
        }
        if let Some(chain) = &self.chain {
            out.push_str("\n[chain]\n");
            for (i, b) in chain.bases().iter().enumerate() {
                let _ = writeln!(out, "B{i} = {b}");
            }
        }
        for (j, fs) in self.branches.iter().enumerate() {
            let _ = writeln!(out, "\n[branch {}]", j + 1);
            for (i, f) in fs.iter().enumerate() {
                let _ = writeln!(out, "F{i} = {f}");
            }
        }
        if let Some(gs) = &self.coincidence {
            out.push_str("\n[coincidence]\n");
            for (i, g) in gs.iter().enumerate() {
                let _ = writeln!(out, "G{i} = {g}");
            }
        }
        out
    }
}
