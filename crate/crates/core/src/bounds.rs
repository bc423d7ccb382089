//! Chromatic-style quantities over interaction graphs: the fractional and
//! integer mixed chromatic numbers, the constructive tree coloring with
//! 2Δ−1 mixed stable sets, the corrected average density of a support
//! list, and the closed-form cycle values, plus the dispatcher that turns
//! them into approximation factors per instance kind.

use crate::graph::{
    enumerate_mixed_stable_sets, GraphError, InteractionGraph, MixedStableSet, SupportList,
};
use crate::instance::{Instance, Kind, Q, Relation, Row, Sense, VarKind};
use crate::kernel::{solve_lp, solve_milp, KernelError, SolveStatus};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const DENSITY_MEMBER_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    PackingEta,
    CoveringEtaBar,
    GeneralDensity,
    Brooks,
    TreeClosedForm,
    CycleClosedForm,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::PackingEta => "packing_eta",
            BoundKind::CoveringEtaBar => "covering_eta_bar",
            BoundKind::GeneralDensity => "general_density",
            BoundKind::Brooks => "brooks",
            BoundKind::TreeClosedForm => "tree_closed_form",
            BoundKind::CycleClosedForm => "cycle_closed_form",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Certificate {
    /// Fractional covering weights per mixed stable set.
    Weights(Vec<(MixedStableSet, Q)>),
    /// An integral covering family of mixed stable sets.
    Family(Vec<MixedStableSet>),
    /// The density-achieving covering sub-list.
    SubList(Vec<BTreeSet<usize>>),
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: Q,
    pub certificate: Option<Certificate>,
}

impl BoundReport {
    /// `kind,value,certificate-summary` CSV row.
    pub fn csv_row(&self) -> String {
        let summary = match &self.certificate {
            None => String::from("-"),
            Some(Certificate::Weights(w)) => format!("{} weighted sets", w.len()),
            Some(Certificate::Family(f)) => format!("{} covering sets", f.len()),
            Some(Certificate::SubList(s)) => format!("{} sub-list members", s.len()),
        };
        format!("{},{},{}", self.kind.as_str(), crate::instance::format_rational(&self.value), summary)
    }
}

#[derive(Debug, Error)]
pub enum BoundError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("graph is not a tree with at least one edge")]
    NotATree,
    #[error("graph is not connected")]
    Disconnected,
    #[error("support list has no sub-collection covering all nodes")]
    ListDoesNotCover,
    #[error("support list has {0} members, density cap is {DENSITY_MEMBER_CAP}")]
    TooManyMembers(usize),
    #[error("cycle length {0} is below 3")]
    BadCycleLength(usize),
}

/// Columns for the covering LP/ILP: maximal mixed stable sets, one per
/// distinct incidence vector (the objective only sees incidences).
fn chromatic_columns(
    graph: &InteractionGraph,
    list: &SupportList,
) -> Result<Vec<MixedStableSet>, BoundError> {
    let sets = enumerate_mixed_stable_sets(graph, list, true)?;
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut cols = Vec::new();
    for s in sets {
        if seen.insert(s.incidence.clone()) {
            cols.push(s);
        }
    }
    Ok(cols)
}

fn covering_instance(
    graph: &InteractionGraph,
    cols: &[MixedStableSet],
    integer: bool,
) -> Instance {
    let n = graph.node_count;
    let rows = (0..n)
        .map(|v| {
            let coeffs: Vec<(usize, Q)> = cols
                .iter()
                .enumerate()
                .filter(|(_, s)| s.incidence[v] == 1)
                .map(|(k, _)| (k, Q::one()))
                .collect();
            Row::new(coeffs, Relation::Ge, Q::one())
        })
        .collect();
    Instance {
        sense: Sense::Minimize,
        num_vars: cols.len(),
        objective: vec![Q::one(); cols.len()],
        rows,
        var_kinds: vec![if integer { VarKind::Integer } else { VarKind::Continuous }; cols.len()],
        // Weight 1 per set suffices for covering, so integer vars can be
        // boxed at 1.
        bounds: vec![(Q::zero(), if integer { Some(Q::one()) } else { None }); cols.len()],
        kind: Kind::Covering,
    }
}

/// Fractional mixed chromatic number: min Σ y_M with Σ y_M χ_M ≥ 1, y ≥ 0,
/// over maximal mixed stable sets.
pub fn fractional_mixed_chromatic(
    graph: &InteractionGraph,
    list: &SupportList,
) -> Result<BoundReport, BoundError> {
    let cols = chromatic_columns(graph, list)?;
    let inst = covering_instance(graph, &cols, false);
    let r = solve_lp(&inst, &[])?;
    if r.status != SolveStatus::Optimal {
        return Err(BoundError::ListDoesNotCover);
    }
    let weights: Vec<(MixedStableSet, Q)> = cols
        .into_iter()
        .zip(&r.solution)
        .filter(|(_, y)| !y.is_zero())
        .map(|(s, y)| (s, y.clone()))
        .collect();
    Ok(BoundReport {
        kind: BoundKind::PackingEta,
        value: r.value,
        certificate: Some(Certificate::Weights(weights)),
    })
}

/// Integer mixed chromatic number: smallest covering family of mixed
/// stable sets.
pub fn mixed_chromatic(
    graph: &InteractionGraph,
    list: &SupportList,
) -> Result<BoundReport, BoundError> {
    let cols = chromatic_columns(graph, list)?;
    let inst = covering_instance(graph, &cols, true);
    let r = solve_milp(&inst, &[])?;
    if r.status != SolveStatus::Optimal {
        return Err(BoundError::ListDoesNotCover);
    }
    let family: Vec<MixedStableSet> = cols
        .into_iter()
        .zip(&r.solution)
        .filter(|(_, y)| !y.is_zero())
        .map(|(s, _)| s)
        .collect();
    Ok(BoundReport {
        kind: BoundKind::CoveringEtaBar,
        value: r.value,
        certificate: Some(Certificate::Family(family)),
    })
}

/// The constructive coloring for trees: 2Δ−1 mixed stable sets subordinate
/// to the edge list, covering every node exactly Δ times.
///
/// Internal nodes are padded with phantom leaves up to degree Δ, the tree
/// is rooted at an internal node, the root's Δ edges get labels 1..Δ, each
/// internal node relabels its Δ−1 down-edges with the labels missing at
/// its parent (ascending), each leaf joins — as a singleton — every label
/// missing at its parent, and finally the phantom leaves are stripped
/// (phantom-edge parts shrink to the real endpoint).
pub fn tree_mixed_coloring(tree: &InteractionGraph) -> Result<Vec<MixedStableSet>, BoundError> {
    if !tree.is_tree() || tree.node_count < 2 {
        return Err(BoundError::NotATree);
    }
    let n = tree.node_count;
    let delta = tree.max_degree();
    if delta == 1 {
        // Single edge: one set holding that edge.
        let (a, b) = *tree.edges.iter().next().unwrap();
        let mut incidence = vec![0u8; n];
        incidence[a] = 1;
        incidence[b] = 1;
        return Ok(vec![MixedStableSet { parts: vec![BTreeSet::from([a, b])], incidence }]);
    }
    // Augmented adjacency; phantom nodes get indices >= n.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in &tree.edges {
        adj[*a].push(*b);
        adj[*b].push(*a);
    }
    let mut next = n;
    for v in 0..n {
        if adj[v].len() >= 2 {
            while adj[v].len() < delta {
                adj[v].push(next);
                adj.push(vec![v]);
                next += 1;
            }
        }
    }
    let total = adj.len();
    for a in &mut adj {
        a.sort_unstable();
    }
    let root = (0..n).find(|&v| adj[v].len() == delta).expect("tree with Δ≥2 has internal node");
    // BFS; edge labels keyed by (min,max); incident label sets per node.
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut label: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut parent: Vec<Option<usize>> = vec![None; total];
    let mut order = vec![root];
    let mut seen = vec![false; total];
    seen[root] = true;
    let mut head = 0;
    // Labels are 1-based in 1..=2Δ−1; singles[l] collects nodes absorbing l.
    let mut singles: Vec<Vec<usize>> = vec![Vec::new(); 2 * delta];
    for (i, &c) in adj[root].iter().enumerate() {
        label.insert(key(root, c), i + 1);
    }
    while head < order.len() {
        let v = order[head];
        head += 1;
        let children: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
        for &c in &children {
            seen[c] = true;
            parent[c] = Some(v);
            order.push(c);
        }
        if v == root {
            continue;
        }
        let par = parent[v].unwrap();
        let s: BTreeSet<usize> = adj[par].iter().map(|&w| label[&key(par, w)]).collect();
        debug_assert_eq!(s.len(), delta);
        let free: Vec<usize> = (1..=2 * delta - 1).filter(|l| !s.contains(l)).collect();
        if children.is_empty() {
            // Leaf: absorb every label missing at the parent.
            for &l in &free {
                singles[l].push(v);
            }
        } else {
            debug_assert_eq!(children.len(), delta - 1);
            for (&c, &l) in children.iter().zip(&free) {
                label.insert(key(v, c), l);
            }
        }
    }
    // Assemble the 2Δ−1 sets, stripping phantom nodes.
    let mut out = Vec::with_capacity(2 * delta - 1);
    for l in 1..=2 * delta - 1 {
        let mut parts: Vec<BTreeSet<usize>> = Vec::new();
        for (&(a, b), &lab) in &label {
            if lab != l {
                continue;
            }
            let part: BTreeSet<usize> = [a, b].into_iter().filter(|&v| v < n).collect();
            if !part.is_empty() {
                parts.push(part);
            }
        }
        for &v in &singles[l] {
            if v < n {
                parts.push(BTreeSet::from([v]));
            }
        }
        parts.sort();
        let mut incidence = vec![0u8; n];
        for p in &parts {
            for &v in p {
                incidence[v] = 1;
            }
        }
        out.push(MixedStableSet { parts, incidence });
    }
    Ok(out)
}

/// Max over covering sub-collections Ṽ of the average member size
/// (Σ|V^u|)/|Ṽ|; ties broken toward the earliest subset in mask order.
pub fn corrected_average_density(
    list: &SupportList,
    node_count: usize,
) -> Result<BoundReport, BoundError> {
    let k = list.members.len();
    if k > DENSITY_MEMBER_CAP {
        return Err(BoundError::TooManyMembers(k));
    }
    let masks: Vec<u64> = list
        .members
        .iter()
        .map(|m| m.iter().fold(0u64, |acc, &v| acc | (1 << v)))
        .collect();
    let full: u64 = if node_count == 64 { u64::MAX } else { (1u64 << node_count) - 1 };
    let mut best: Option<(Q, u32)> = None;
    for subset in 1u32..(1u32 << k) {
        let mut cover = 0u64;
        let mut size_sum = 0usize;
        let mut count = 0usize;
        for (i, &m) in masks.iter().enumerate() {
            if subset & (1 << i) != 0 {
                cover |= m;
                size_sum += list.members[i].len();
                count += 1;
            }
        }
        if cover != full {
            continue;
        }
        let d = Q::new(BigInt::from(size_sum), BigInt::from(count));
        if best.as_ref().map_or(true, |(b, _)| d > *b) {
            best = Some((d, subset));
        }
    }
    let Some((value, subset)) = best else { return Err(BoundError::ListDoesNotCover) };
    let sub: Vec<BTreeSet<usize>> = (0..k)
        .filter(|i| subset & (1 << i) != 0)
        .map(|i| list.members[i].clone())
        .collect();
    Ok(BoundReport {
        kind: BoundKind::GeneralDensity,
        value,
        certificate: Some(Certificate::SubList(sub)),
    })
}

use num_bigint::BigInt;

/// The approximation factor associated with an instance kind:
/// packing → η, covering → η̄ (bound factor is its reciprocal),
/// general → |V| + 1 − D_V.
pub fn theoretical_bound(
    kind: Kind,
    graph: &InteractionGraph,
    list: &SupportList,
) -> Result<BoundReport, BoundError> {
    match kind {
        Kind::Packing => fractional_mixed_chromatic(graph, list),
        Kind::Covering => mixed_chromatic(graph, list),
        Kind::General => {
            let d = corrected_average_density(list, graph.node_count)?;
            let value = Q::from_integer((graph.node_count as i64 + 1).into()) - &d.value;
            Ok(BoundReport { kind: BoundKind::GeneralDensity, value, certificate: d.certificate })
        }
    }
}

/// Δ, or Δ+1 for complete graphs and odd cycles.
pub fn brooks_bound(graph: &InteractionGraph) -> Result<BoundReport, BoundError> {
    if !graph.is_connected() {
        return Err(BoundError::Disconnected);
    }
    let n = graph.node_count;
    let delta = graph.max_degree();
    let complete = graph.edges.len() == n * (n - 1) / 2;
    let odd_cycle = n >= 3 && n % 2 == 1 && (0..n).all(|v| graph.degree(v) == 2);
    let value = if complete || odd_cycle { delta + 1 } else { delta };
    Ok(BoundReport {
        kind: BoundKind::Brooks,
        value: Q::from_integer((value as i64).into()),
        certificate: None,
    })
}

/// η of the K-cycle with the all-edges support list, in closed form.
pub fn closed_form_cycle_bound(k: usize) -> Result<Q, BoundError> {
    if k < 3 {
        return Err(BoundError::BadCycleLength(k));
    }
    let t = (k / 3) as i64;
    Ok(match k % 3 {
        0 => Q::new(3.into(), 2.into()),
        1 => Q::new((3 * t + 1).into(), (2 * t).into()),
        _ => Q::new((3 * t + 2).into(), (2 * t + 1).into()),
    })
}
