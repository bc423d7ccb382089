//! MILP instances, block partitions, cuts, and the SMILP v1 text format.
//!
//! An [`Instance`] stores a sense, a rational objective, sparse rows with
//! per-row relations, per-variable kinds and bounds, and a `kind` tag
//! (packing / covering / general) that carries sign conventions. Everything
//! is exact rational. Instances are immutable after construction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Q = BigRational;

/// Build a rational from an integer.
pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Build a rational from numerator and denominator.
pub fn qr(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Packing,
    Covering,
    General,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Packing => "packing",
            Kind::Covering => "covering",
            Kind::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Integer,
    Continuous,
}

/// One sparse constraint row `sum_j a_j x_j REL rhs`.
///
/// Coefficient indices are 0-based, strictly increasing, with nonzero values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, Q)>, relation: Relation, rhs: Q) -> Self {
        Row { coeffs, relation, rhs }
    }

    /// Column indices with nonzero coefficients.
    pub fn support(&self) -> BTreeSet<usize> {
        self.coeffs.iter().map(|(j, _)| *j).collect()
    }

    /// Evaluate the left-hand side at a point.
    pub fn activity(&self, x: &[Q]) -> Q {
        let mut s = Q::zero();
        for (j, a) in &self.coeffs {
            s += a * &x[*j];
        }
        s
    }

    /// Does `x` satisfy this row exactly?
    pub fn satisfied_by(&self, x: &[Q]) -> bool {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// A MILP instance with exact rational data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub sense: Sense,
    pub num_vars: usize,
    pub objective: Vec<Q>,
    pub rows: Vec<Row>,
    pub var_kinds: Vec<VarKind>,
    /// Per-variable (lower, upper); `None` upper bound means +infinity.
    pub bounds: Vec<(Q, Option<Q>)>,
    pub kind: Kind,
}

impl Instance {
    /// All-binary instance helper: every variable integer in [0,1].
    pub fn binary(sense: Sense, kind: Kind, objective: Vec<Q>, rows: Vec<Row>) -> Self {
        let n = objective.len();
        Instance {
            sense,
            num_vars: n,
            objective,
            rows,
            var_kinds: vec![VarKind::Integer; n],
            bounds: vec![(Q::zero(), Some(Q::one())); n],
            kind,
        }
    }

    /// Evaluate the objective at a point.
    pub fn objective_value(&self, x: &[Q]) -> Q {
        let mut s = Q::zero();
        for (c, v) in self.objective.iter().zip(x) {
            s += c * v;
        }
        s
    }

    /// Is `x` feasible for the LP relaxation (rows + bounds), exactly?
    pub fn lp_feasible(&self, x: &[Q]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        for (j, (lb, ub)) in self.bounds.iter().enumerate() {
            if &x[j] < lb {
                return false;
            }
            if let Some(u) = ub {
                if &x[j] > u {
                    return false;
                }
            }
        }
        self.rows.iter().all(|r| r.satisfied_by(x))
    }

    /// Is `x` integer-feasible (LP-feasible and integral on integer variables)?
    pub fn integer_feasible(&self, x: &[Q]) -> bool {
        self.lp_feasible(x)
            && self
                .var_kinds
                .iter()
                .zip(x)
                .all(|(k, v)| *k == VarKind::Continuous || v.is_integer())
    }

    /// Check all structural and kind-tag invariants; empty list means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.num_vars;
        if self.objective.len() != n {
            out.push(Diagnostic::new("objective length != num_vars", None, None));
        }
        if self.var_kinds.len() != n {
            out.push(Diagnostic::new("var_kinds length != num_vars", None, None));
        }
        if self.bounds.len() != n {
            out.push(Diagnostic::new("bounds length != num_vars", None, None));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for (j, a) in &row.coeffs {
                if *j >= n {
                    out.push(Diagnostic::new("column index out of range", Some(i), Some(*j)));
                }
                if a.is_zero() {
                    out.push(Diagnostic::new("zero coefficient stored", Some(i), Some(*j)));
                }
                if let Some(p) = prev {
                    if *j <= p {
                        out.push(Diagnostic::new(
                            "column indices not strictly increasing",
                            Some(i),
                            Some(*j),
                        ));
                    }
                }
                prev = Some(*j);
            }
        }
        // Kind-tag sign conventions.
        let sign_restricted = matches!(self.kind, Kind::Packing | Kind::Covering);
        if sign_restricted {
            for (i, row) in self.rows.iter().enumerate() {
                for (j, a) in &row.coeffs {
                    if a.is_negative() {
                        out.push(Diagnostic::new("coefficient sign", Some(i), Some(*j)));
                    }
                }
                if row.rhs.is_negative() {
                    out.push(Diagnostic::new("rhs sign", Some(i), None));
                }
                let want = match self.kind {
                    Kind::Packing => Relation::Le,
                    _ => Relation::Ge,
                };
                if row.relation != want {
                    out.push(Diagnostic::new("relation for kind", Some(i), None));
                }
            }
        }
        for (j, c) in self.objective.iter().enumerate() {
            if c.is_negative() {
                out.push(Diagnostic::new("objective sign", None, Some(j)));
            }
        }
        for (j, (lb, _)) in self.bounds.iter().enumerate() {
            if !lb.is_zero() {
                out.push(Diagnostic::new("lower bound must be 0", None, Some(j)));
            }
        }
        out
    }
}

/// A named validation finding: which condition failed and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub condition: String,
    pub row: Option<usize>,
    pub column: Option<usize>,
}

impl Diagnostic {
    fn new(condition: &str, row: Option<usize>, column: Option<usize>) -> Self {
        Diagnostic { condition: condition.to_string(), row, column }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.condition)?;
        if let Some(r) = self.row {
            write!(f, ", row {}", r + 1)?;
        }
        if let Some(c) = self.column {
            write!(f, ", column {}", c + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Columns,
    Rows,
}

/// An ordered partition of column or row indices into disjoint blocks
/// covering the full index range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    pub axis: Axis,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(axis: Axis, blocks: Vec<Vec<usize>>) -> Self {
        BlockPartition { axis, blocks }
    }

    /// Singleton blocks 0..n.
    pub fn singletons(axis: Axis, n: usize) -> Self {
        BlockPartition { axis, blocks: (0..n).map(|j| vec![j]).collect() }
    }

    /// Check the partition covers exactly 0..n with disjoint nonempty blocks.
    pub fn is_valid_for(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for b in &self.blocks {
            if b.is_empty() {
                return false;
            }
            for &i in b {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// A cutting plane: sparse coefficients, rhs, relation, and the column
/// support the cut was generated on (zero coefficients inside the support
/// are allowed; nonzeros outside it are not).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub coeffs: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
    pub support: BTreeSet<usize>,
}

impl Cut {
    pub fn new(coeffs: Vec<(usize, Q)>, relation: Relation, rhs: Q, support: BTreeSet<usize>) -> Self {
        Cut { coeffs, relation, rhs, support }
    }

    pub fn is_well_formed(&self) -> bool {
        self.coeffs.iter().all(|(j, a)| a.is_zero() || self.support.contains(j))
    }

    pub fn as_row(&self) -> Row {
        Row::new(
            self.coeffs.iter().filter(|(_, a)| !a.is_zero()).cloned().collect(),
            self.relation,
            self.rhs.clone(),
        )
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invariant violation: {0}")]
    Invalid(Diagnostic),
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Parse { line, msg: msg.into() })
}

/// Parse a rational written as `p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<Q> {
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.parse().ok()?;
        let d: BigInt = b.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
}

/// Format a rational as `p` or `p/q` (always reduced).
pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serialize an instance (and optional partitions) to canonical SMILP v1 text.
pub fn instance_to_string(instance: &Instance, partitions: &[BlockPartition]) -> String {
    let mut s = String::new();
    s.push_str("SMILP 1\n");
    s.push_str(match instance.sense {
        Sense::Maximize => "sense max\n",
        Sense::Minimize => "sense min\n",
    });
    let _ = writeln!(s, "kind {}", instance.kind.as_str());
    let _ = writeln!(s, "vars {}", instance.num_vars);
    let obj: Vec<String> = instance.objective.iter().map(format_rational).collect();
    let _ = writeln!(s, "obj {}", obj.join(" "));
    let mut vt = String::new();
    for (k, (lb, ub)) in instance.var_kinds.iter().zip(&instance.bounds) {
        let c = match k {
            VarKind::Continuous => 'C',
            VarKind::Integer => {
                if lb.is_zero() && ub.as_ref().map(|u| u.is_one()).unwrap_or(false) {
                    'B'
                } else {
                    'I'
                }
            }
        };
        vt.push(c);
    }
    let _ = writeln!(s, "vartypes {}", vt);
    for row in &instance.rows {
        let mut coeffs = row.coeffs.clone();
        coeffs.sort_by_key(|(j, _)| *j);
        let body: Vec<String> = coeffs
            .iter()
            .map(|(j, a)| format!("{} {}", j + 1, format_rational(a)))
            .collect();
        let _ = writeln!(
            s,
            "row {} {} : {}",
            row.relation.as_str(),
            format_rational(&row.rhs),
            body.join(" ")
        );
    }
    for p in partitions {
        let name = match p.axis {
            Axis::Columns => "colblocks",
            Axis::Rows => "rowblocks",
        };
        let blocks: Vec<String> = p
            .blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.sort_unstable();
                b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
            })
            .collect();
        let _ = writeln!(s, "{} {} : {}", name, p.blocks.len(), blocks.join(" | "));
    }
    s
}

/// Parse SMILP v1 text into a validated instance plus any partitions.
pub fn instance_from_string(text: &str) -> Result<(Instance, Vec<BlockPartition>), FormatError> {
    let mut sense = None;
    let mut kind = None;
    let mut num_vars: Option<usize> = None;
    let mut objective: Option<Vec<Q>> = None;
    let mut var_kinds: Option<Vec<VarKind>> = None;
    let mut bounds: Option<Vec<(Q, Option<Q>)>> = None;
    let mut rows = Vec::new();
    let mut partitions = Vec::new();
    let mut saw_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if !saw_header {
            if content != "SMILP 1" {
                return perr(line, "expected header `SMILP 1`");
            }
            saw_header = true;
            continue;
        }
        let (key, rest) = match content.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (content, ""),
        };
        match key {
            "sense" => {
                sense = Some(match rest {
                    "max" => Sense::Maximize,
                    "min" => Sense::Minimize,
                    _ => return perr(line, "sense must be max or min"),
                });
            }
            "kind" => {
                kind = Some(match rest {
                    "packing" => Kind::Packing,
                    "covering" => Kind::Covering,
                    "general" => Kind::General,
                    _ => return perr(line, "kind must be packing, covering or general"),
                });
            }
            "vars" => {
                num_vars = Some(
                    rest.parse()
                        .map_err(|_| FormatError::Parse { line, msg: "bad vars count".into() })?,
                );
            }
            "obj" => {
                let mut v = Vec::new();
                for tok in rest.split_whitespace() {
                    match parse_rational(tok) {
                        Some(x) => v.push(x),
                        None => return perr(line, format!("bad rational `{tok}`")),
                    }
                }
                objective = Some(v);
            }
            "vartypes" => {
                let mut ks = Vec::new();
                let mut bs = Vec::new();
                for c in rest.chars() {
                    match c {
                        'B' => {
                            ks.push(VarKind::Integer);
                            bs.push((Q::zero(), Some(Q::one())));
                        }
                        'I' => {
                            ks.push(VarKind::Integer);
                            bs.push((Q::zero(), None));
                        }
                        'C' => {
                            ks.push(VarKind::Continuous);
                            bs.push((Q::zero(), None));
                        }
                        _ => return perr(line, format!("bad vartype `{c}`")),
                    }
                }
                var_kinds = Some(ks);
                bounds = Some(bs);
            }
            "row" => {
                let (head, body) = match rest.split_once(':') {
                    Some((h, b)) => (h.trim(), b.trim()),
                    None => return perr(line, "row line needs `:`"),
                };
                let mut head_it = head.split_whitespace();
                let rel = match head_it.next() {
                    Some("<=") => Relation::Le,
                    Some(">=") => Relation::Ge,
                    Some("=") => Relation::Eq,
                    _ => return perr(line, "bad relation"),
                };
                let rhs = match head_it.next().and_then(parse_rational) {
                    Some(x) => x,
                    None => return perr(line, "bad rhs"),
                };
                if head_it.next().is_some() {
                    return perr(line, "trailing tokens before `:`");
                }
                let toks: Vec<&str> = body.split_whitespace().collect();
                if toks.len() % 2 != 0 {
                    return perr(line, "row body must be index/value pairs");
                }
                let mut coeffs = Vec::new();
                for pair in toks.chunks(2) {
                    let j: usize = match pair[0].parse::<usize>() {
                        Ok(j) if j >= 1 => j - 1,
                        _ => return perr(line, format!("bad column index `{}`", pair[0])),
                    };
                    let a = match parse_rational(pair[1]) {
                        Some(a) => a,
                        None => return perr(line, format!("bad rational `{}`", pair[1])),
                    };
                    coeffs.push((j, a));
                }
                rows.push(Row::new(coeffs, rel, rhs));
            }
            "colblocks" | "rowblocks" => {
                let axis = if key == "colblocks" { Axis::Columns } else { Axis::Rows };
                let (count_str, body) = match rest.split_once(':') {
                    Some((h, b)) => (h.trim(), b.trim()),
                    None => return perr(line, "partition line needs `:`"),
                };
                let count: usize = count_str
                    .parse()
                    .map_err(|_| FormatError::Parse { line, msg: "bad block count".into() })?;
                let mut blocks = Vec::new();
                for part in body.split('|') {
                    let mut b = Vec::new();
                    for tok in part.split_whitespace() {
                        let i: usize = match tok.parse::<usize>() {
                            Ok(i) if i >= 1 => i - 1,
                            _ => return perr(line, format!("bad index `{tok}`")),
                        };
                        b.push(i);
                    }
                    blocks.push(b);
                }
                if blocks.len() != count {
                    return perr(line, "block count mismatch");
                }
                partitions.push(BlockPartition::new(axis, blocks));
            }
            _ => return perr(line, format!("unknown directive `{key}`")),
        }
    }
    if !saw_header {
        return perr(1, "empty file");
    }
    let num_vars = num_vars.ok_or(FormatError::Parse { line: 0, msg: "missing vars".into() })?;
    let instance = Instance {
        sense: sense.ok_or(FormatError::Parse { line: 0, msg: "missing sense".into() })?,
        num_vars,
        objective: objective.ok_or(FormatError::Parse { line: 0, msg: "missing obj".into() })?,
        rows,
        var_kinds: var_kinds.ok_or(FormatError::Parse { line: 0, msg: "missing vartypes".into() })?,
        bounds: bounds.unwrap(),
        kind: kind.ok_or(FormatError::Parse { line: 0, msg: "missing kind".into() })?,
    };
    if let Some(d) = instance.validate().into_iter().next() {
        return Err(FormatError::Invalid(d));
    }
    for p in &partitions {
        let range = match p.axis {
            Axis::Columns => instance.num_vars,
            Axis::Rows => instance.rows.len(),
        };
        if !p.is_valid_for(range) {
            return Err(FormatError::Invalid(Diagnostic::new(
                "partition does not cover its axis",
                None,
                None,
            )));
        }
    }
    Ok((instance, partitions))
}

/// Load an instance (plus partitions) from a file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<(Instance, Vec<BlockPartition>), FormatError> {
    let text = std::fs::read_to_string(path)?;
    instance_from_string(&text)
}

/// Save an instance (plus partitions) in canonical form.
pub fn save_instance(
    instance: &Instance,
    partitions: &[BlockPartition],
    path: impl AsRef<Path>,
) -> Result<(), FormatError> {
    std::fs::write(path, instance_to_string(instance, partitions))?;
    Ok(())
}
