//! Interaction graphs over block partitions, support lists, and mixed
//! stable sets.
//!
//! A packing interaction graph has one node per column block, with an edge
//! when some row touches both blocks. A covering interaction graph has one
//! node per row block, with an edge when the two blocks' column supports
//! intersect. A mixed stable set is a collection of pairwise disjoint node
//! sets, each contained in a support-list member, with no graph edge
//! between two distinct parts.

use crate::instance::{Axis, BlockPartition, Instance};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

pub const DEFAULT_NODE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Packing,
    Covering,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    pub kind: GraphKind,
    pub node_count: usize,
    pub edges: BTreeSet<(usize, usize)>,
    /// Per node: the column indices it stands for (partition block for
    /// packing, union of row supports for covering).
    pub node_to_columns: Vec<BTreeSet<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportList {
    pub members: Vec<BTreeSet<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MixedStableSet {
    pub parts: Vec<BTreeSet<usize>>,
    pub incidence: Vec<u8>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),
    #[error("graph has {nodes} nodes, enumeration cap is {cap}")]
    NodeCapExceeded { nodes: usize, cap: usize },
    #[error("support list member out of range or empty")]
    BadSupportList,
}

impl InteractionGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        let mut n = BTreeSet::new();
        for (a, b) in &self.edges {
            if *a == v {
                n.insert(*b);
            } else if *b == v {
                n.insert(*a);
            }
        }
        n
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_tree(&self) -> bool {
        self.node_count > 0
            && self.edges.len() == self.node_count - 1
            && self.is_connected()
    }

    /// Edge-list text: node count, then one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", self.node_count).unwrap();
        for (a, b) in &self.edges {
            writeln!(s, "{a} {b}").unwrap();
        }
        s
    }

    /// Build a graph directly from an edge list (used for closed-form
    /// shapes like cycles and stars where no instance exists).
    pub fn from_edges(kind: GraphKind, node_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            assert!(a != b && a < node_count && b < node_count, "bad edge ({a},{b})");
            set.insert((a.min(b), a.max(b)));
        }
        let node_to_columns = (0..node_count).map(|v| BTreeSet::from([v])).collect();
        InteractionGraph { kind, node_count, edges: set, node_to_columns }
    }

    pub fn cycle(k: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        Self::from_edges(GraphKind::Packing, k, &edges)
    }

    pub fn star(delta: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..=delta).map(|i| (0, i)).collect();
        Self::from_edges(GraphKind::Packing, delta + 1, &edges)
    }

    pub fn complete(k: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                edges.push((i, j));
            }
        }
        Self::from_edges(GraphKind::Packing, k, &edges)
    }
}

impl SupportList {
    pub fn new(members: Vec<BTreeSet<usize>>) -> Self {
        SupportList { members }
    }

    /// All-edges list for a graph (each edge as a 2-node member).
    pub fn edges_of(graph: &InteractionGraph) -> Self {
        SupportList {
            members: graph.edges.iter().map(|(a, b)| BTreeSet::from([*a, *b])).collect(),
        }
    }

    pub fn validate(&self, node_count: usize) -> Result<(), GraphError> {
        for m in &self.members {
            if m.is_empty() || m.iter().any(|&v| v >= node_count) {
                return Err(GraphError::BadSupportList);
            }
        }
        Ok(())
    }

    pub fn covers(&self, node_count: usize) -> bool {
        let mut seen = vec![false; node_count];
        for m in &self.members {
            for &v in m {
                seen[v] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

impl MixedStableSet {
    fn from_parts(mut parts: Vec<BTreeSet<usize>>, node_count: usize) -> Self {
        parts.sort();
        let mut incidence = vec![0u8; node_count];
        for p in &parts {
            for &v in p {
                incidence[v] = 1;
            }
        }
        MixedStableSet { parts, incidence }
    }

    pub fn union(&self) -> BTreeSet<usize> {
        self.parts.iter().flatten().copied().collect()
    }

    /// The three defining predicates: parts inside members, pairwise
    /// disjoint, no edge between two distinct parts.
    pub fn is_subordinate(&self, graph: &InteractionGraph, list: &SupportList) -> bool {
        for p in &self.parts {
            if p.is_empty() || !list.members.iter().any(|m| p.is_subset(m)) {
                return false;
            }
        }
        for i in 0..self.parts.len() {
            for j in i + 1..self.parts.len() {
                if !self.parts[i].is_disjoint(&self.parts[j]) {
                    return false;
                }
                for &a in &self.parts[i] {
                    for &b in &self.parts[j] {
                        if graph.edges.contains(&(a.min(b), a.max(b))) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Part-wise dominance: every part of `self` inside some part of `other`.
    fn dominated_by(&self, other: &MixedStableSet) -> bool {
        self.parts.iter().all(|p| other.parts.iter().any(|q| p.is_subset(q)))
    }
}

/// Packing interaction graph: nodes are column blocks, edge when a row has
/// nonzero coefficients in both blocks.
pub fn build_packing_graph(
    instance: &Instance,
    col_partition: &BlockPartition,
) -> Result<InteractionGraph, GraphError> {
    if col_partition.axis != Axis::Columns || !col_partition.is_valid_for(instance.num_vars) {
        return Err(GraphError::PartitionMismatch(format!(
            "need a column partition covering 0..{}",
            instance.num_vars
        )));
    }
    let q = col_partition.blocks.len();
    let mut col_to_node = vec![0usize; instance.num_vars];
    for (b, block) in col_partition.blocks.iter().enumerate() {
        for &j in block {
            col_to_node[j] = b;
        }
    }
    let mut edges = BTreeSet::new();
    for row in &instance.rows {
        let nodes: BTreeSet<usize> = row.support().iter().map(|&j| col_to_node[j]).collect();
        let nodes: Vec<usize> = nodes.into_iter().collect();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                edges.insert((nodes[i], nodes[j]));
            }
        }
    }
    let node_to_columns =
        col_partition.blocks.iter().map(|b| b.iter().copied().collect()).collect();
    Ok(InteractionGraph { kind: GraphKind::Packing, node_count: q, edges, node_to_columns })
}

/// Covering interaction graph: nodes are row blocks, edge when the column
/// supports of two blocks intersect.
pub fn build_covering_graph(
    instance: &Instance,
    row_partition: &BlockPartition,
) -> Result<InteractionGraph, GraphError> {
    if row_partition.axis != Axis::Rows || !row_partition.is_valid_for(instance.rows.len()) {
        return Err(GraphError::PartitionMismatch(format!(
            "need a row partition covering 0..{}",
            instance.rows.len()
        )));
    }
    let p = row_partition.blocks.len();
    let node_to_columns: Vec<BTreeSet<usize>> = row_partition
        .blocks
        .iter()
        .map(|b| b.iter().flat_map(|&r| instance.rows[r].support()).collect())
        .collect();
    let mut edges = BTreeSet::new();
    for i in 0..p {
        for j in i + 1..p {
            if !node_to_columns[i].is_disjoint(&node_to_columns[j]) {
                edges.insert((i, j));
            }
        }
    }
    Ok(InteractionGraph { kind: GraphKind::Covering, node_count: p, edges, node_to_columns })
}

/// All-singletons support list.
pub fn super_sparse_list(graph: &InteractionGraph) -> SupportList {
    SupportList {
        members: (0..graph.node_count).map(|v| BTreeSet::from([v])).collect(),
    }
}

/// One member per row: the nodes whose column sets meet the row's support.
/// Duplicate members are removed (first occurrence kept).
pub fn natural_sparse_list(instance: &Instance, graph: &InteractionGraph) -> SupportList {
    let mut members: Vec<BTreeSet<usize>> = Vec::new();
    for row in &instance.rows {
        let supp = row.support();
        let member: BTreeSet<usize> = (0..graph.node_count)
            .filter(|&v| !graph.node_to_columns[v].is_disjoint(&supp))
            .collect();
        if !member.is_empty() && !members.contains(&member) {
            members.push(member);
        }
    }
    SupportList { members }
}

/// Columns represented by a node set: union of `node_to_columns`.
pub fn support_columns(graph: &InteractionGraph, nodes: &BTreeSet<usize>) -> BTreeSet<usize> {
    nodes.iter().flat_map(|&v| graph.node_to_columns[v].iter().copied()).collect()
}

/// Enumerate mixed stable sets subordinate to the list; with `maximal_only`
/// keep only those not part-wise dominated by another one.
pub fn enumerate_mixed_stable_sets(
    graph: &InteractionGraph,
    list: &SupportList,
    maximal_only: bool,
) -> Result<Vec<MixedStableSet>, GraphError> {
    enumerate_mixed_stable_sets_with_cap(graph, list, maximal_only, DEFAULT_NODE_CAP)
}

pub fn enumerate_mixed_stable_sets_with_cap(
    graph: &InteractionGraph,
    list: &SupportList,
    maximal_only: bool,
    cap: usize,
) -> Result<Vec<MixedStableSet>, GraphError> {
    let n = graph.node_count;
    if n > cap {
        return Err(GraphError::NodeCapExceeded { nodes: n, cap });
    }
    list.validate(n)?;
    // Bitmask machinery: valid parts are the nonempty subsets of members.
    let member_masks: Vec<u32> = list
        .members
        .iter()
        .map(|m| m.iter().fold(0u32, |acc, &v| acc | (1 << v)))
        .collect();
    let mut parts: BTreeSet<u32> = BTreeSet::new();
    for &mm in &member_masks {
        // Iterate over nonempty submasks of mm.
        let mut s = mm;
        while s != 0 {
            parts.insert(s);
            s = (s - 1) & mm;
        }
    }
    let parts: Vec<u32> = parts.into_iter().collect();
    let nbr: Vec<u32> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u32, |acc, &w| acc | (1 << w)))
        .collect();
    let part_nbr: Vec<u32> = parts
        .iter()
        .map(|&p| {
            let mut m = 0u32;
            for v in 0..n {
                if p & (1 << v) != 0 {
                    m |= nbr[v];
                }
            }
            m & !p
        })
        .collect();
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    fn dfs(
        start: usize,
        used: u32,
        blocked: u32,
        parts: &[u32],
        part_nbr: &[u32],
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        for i in start..parts.len() {
            let p = parts[i];
            if p & used != 0 || p & blocked != 0 || part_nbr[i] & used != 0 {
                continue;
            }
            current.push(p);
            dfs(i + 1, used | p, blocked | part_nbr[i], parts, part_nbr, current, out);
            current.pop();
        }
    }
    dfs(0, 0, 0, &parts, &part_nbr, &mut current, &mut out);
    let unmask = |masks: &[u32]| -> MixedStableSet {
        let ps: Vec<BTreeSet<usize>> = masks
            .iter()
            .map(|&m| (0..n).filter(|&v| m & (1 << v) != 0).collect())
            .collect();
        MixedStableSet::from_parts(ps, n)
    };
    let mut sets: Vec<MixedStableSet> = out.iter().map(|m| unmask(m)).collect();
    sets.sort();
    sets.dedup();
    if maximal_only {
        let keep: Vec<bool> = sets
            .iter()
            .map(|s| !sets.iter().any(|t| t != s && s.dominated_by(t)))
            .collect();
        sets = sets
            .into_iter()
            .zip(keep)
            .filter_map(|(s, k)| if k { Some(s) } else { None })
            .collect();
    }
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{q, Kind, Relation, Row, Sense};

    /// Example matrix: rows {0,1} and {0,2} over three singleton blocks.
    fn path_instance() -> Instance {
        Instance::binary(
            Sense::Maximize,
            Kind::Packing,
            vec![q(1), q(1), q(1)],
            vec![
                Row::new(vec![(0, q(1)), (1, q(1))], Relation::Le, q(1)),
                Row::new(vec![(0, q(1)), (2, q(1))], Relation::Le, q(1)),
            ],
        )
    }

    #[test]
    fn packing_graph_is_path() {
        let inst = path_instance();
        let part = BlockPartition::singletons(Axis::Columns, 3);
        let g = build_packing_graph(&inst, &part).unwrap();
        assert_eq!(g.node_count, 3);
        assert_eq!(g.edges, BTreeSet::from([(0, 1), (0, 2)]));
    }

    #[test]
    fn packing_graph_two_stage_star() {
        // First-stage block {0}, three scenario blocks; every row touches
        // the first stage and one scenario.
        let inst = Instance::binary(
            Sense::Maximize,
            Kind::Packing,
            vec![q(1); 4],
            vec![
                Row::new(vec![(0, q(1)), (1, q(1))], Relation::Le, q(1)),
                Row::new(vec![(0, q(1)), (2, q(1))], Relation::Le, q(1)),
                Row::new(vec![(0, q(1)), (3, q(1))], Relation::Le, q(1)),
            ],
        );
        let part = BlockPartition::singletons(Axis::Columns, 4);
        let g = build_packing_graph(&inst, &part).unwrap();
        assert_eq!(g.edges, BTreeSet::from([(0, 1), (0, 2), (0, 3)]));
    }

    #[test]
    fn block_diagonal_is_edgeless() {
        let inst = Instance::binary(
            Sense::Maximize,
            Kind::Packing,
            vec![q(1); 4],
            vec![
                Row::new(vec![(0, q(1)), (1, q(1))], Relation::Le, q(1)),
                Row::new(vec![(2, q(1)), (3, q(1))], Relation::Le, q(1)),
            ],
        );
        let part = BlockPartition::new(Axis::Columns, vec![vec![0, 1], vec![2, 3]]);
        let g = build_packing_graph(&inst, &part).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.node_count, 2);
    }

    #[test]
    fn covering_graph_clique_on_shared_first_stage() {
        // Three covering rows all touching column 0: K_3 on row blocks.
        let inst = Instance::binary(
            Sense::Minimize,
            Kind::Covering,
            vec![q(1); 4],
            vec![
                Row::new(vec![(0, q(1)), (1, q(1))], Relation::Ge, q(1)),
                Row::new(vec![(0, q(1)), (2, q(1))], Relation::Ge, q(1)),
                Row::new(vec![(0, q(1)), (3, q(1))], Relation::Ge, q(1)),
            ],
        );
        let part = BlockPartition::singletons(Axis::Rows, 3);
        let g = build_covering_graph(&inst, &part).unwrap();
        assert_eq!(g.kind, GraphKind::Covering);
        assert_eq!(g.edges, BTreeSet::from([(0, 1), (0, 2), (1, 2)]));
        assert_eq!(g.node_to_columns[1], BTreeSet::from([0, 2]));
    }

    #[test]
    fn covering_graph_disjoint_rows_edgeless() {
        let inst = Instance::binary(
            Sense::Minimize,
            Kind::Covering,
            vec![q(1); 4],
            vec![
                Row::new(vec![(0, q(1)), (1, q(1))], Relation::Ge, q(1)),
                Row::new(vec![(2, q(1)), (3, q(1))], Relation::Ge, q(1)),
            ],
        );
        let part = BlockPartition::singletons(Axis::Rows, 2);
        let g = build_covering_graph(&inst, &part).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn lists_for_path_example() {
        let inst = path_instance();
        let part = BlockPartition::singletons(Axis::Columns, 3);
        let g = build_packing_graph(&inst, &part).unwrap();
        let ss = super_sparse_list(&g);
        assert_eq!(ss.members.len(), 3);
        assert!(ss.members.iter().all(|m| m.len() == 1));
        let ns = natural_sparse_list(&inst, &g);
        assert_eq!(ns.members, vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 2])]);
    }

    #[test]
    fn natural_list_dedups() {
        let mut inst = path_instance();
        inst.rows.push(inst.rows[0].clone());
        let part = BlockPartition::singletons(Axis::Columns, 3);
        let g = build_packing_graph(&inst, &part).unwrap();
        assert_eq!(natural_sparse_list(&inst, &g).members.len(), 2);
    }

    #[test]
    fn support_columns_union() {
        let inst = path_instance();
        let part = BlockPartition::new(Axis::Columns, vec![vec![0], vec![1, 2]]);
        let g = build_packing_graph(&inst, &part).unwrap();
        assert_eq!(support_columns(&g, &BTreeSet::from([0, 1])), BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn maximal_sets_on_path_example() {
        let inst = path_instance();
        let part = BlockPartition::singletons(Axis::Columns, 3);
        let g = build_packing_graph(&inst, &part).unwrap();
        let ns = natural_sparse_list(&inst, &g);
        let sets = enumerate_mixed_stable_sets(&g, &ns, true).unwrap();
        let expect: Vec<Vec<BTreeSet<usize>>> = vec![
            vec![BTreeSet::from([0, 1])],
            vec![BTreeSet::from([0, 2])],
            vec![BTreeSet::from([1]), BTreeSet::from([2])],
        ];
        let got: Vec<Vec<BTreeSet<usize>>> = sets.iter().map(|s| s.parts.clone()).collect();
        assert_eq!(got.len(), 3);
        for e in &expect {
            assert!(got.contains(e), "missing {e:?}");
        }
    }

    #[test]
    fn edgeless_singletons_single_maximal() {
        let g = InteractionGraph::from_edges(GraphKind::Packing, 3, &[]);
        let list = super_sparse_list(&g);
        let sets = enumerate_mixed_stable_sets(&g, &list, true).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].parts.len(), 3);
    }

    #[test]
    fn triangle_singletons_maximal() {
        let g = InteractionGraph::complete(3);
        let list = super_sparse_list(&g);
        let sets = enumerate_mixed_stable_sets(&g, &list, true).unwrap();
        assert_eq!(sets.len(), 3);
        assert!(sets.iter().all(|s| s.parts.len() == 1 && s.parts[0].len() == 1));
    }

    #[test]
    fn node_cap_enforced() {
        let g = InteractionGraph::cycle(15);
        let list = super_sparse_list(&g);
        assert!(matches!(
            enumerate_mixed_stable_sets(&g, &list, false),
            Err(GraphError::NodeCapExceeded { nodes: 15, cap: 14 })
        ));
    }

    /// Brute force: all subsets U, all set partitions of U, filtered by the
    /// defining predicates.
    fn brute_force(graph: &InteractionGraph, list: &SupportList) -> Vec<MixedStableSet> {
        let n = graph.node_count;
        fn partitions(items: &[usize]) -> Vec<Vec<BTreeSet<usize>>> {
            if items.is_empty() {
                return vec![vec![]];
            }
            let first = items[0];
            let rest = &items[1..];
            let mut out = Vec::new();
            for p in partitions(rest) {
                for i in 0..p.len() {
                    let mut np = p.clone();
                    np[i].insert(first);
                    out.push(np);
                }
                let mut np = p.clone();
                np.push(BTreeSet::from([first]));
                out.push(np);
            }
            out
        }
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let items: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            for parts in partitions(&items) {
                let ms = MixedStableSet::from_parts(parts, n);
                if ms.is_subordinate(graph, list) {
                    out.push(ms);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let cases: Vec<(InteractionGraph, SupportList)> = vec![
            (InteractionGraph::cycle(5), SupportList::edges_of(&InteractionGraph::cycle(5))),
            (InteractionGraph::star(3), SupportList::edges_of(&InteractionGraph::star(3))),
            (InteractionGraph::complete(4), super_sparse_list(&InteractionGraph::complete(4))),
            (
                InteractionGraph::from_edges(GraphKind::Packing, 4, &[(0, 1), (2, 3)]),
                SupportList::new(vec![
                    BTreeSet::from([0, 1, 2]),
                    BTreeSet::from([1, 3]),
                    BTreeSet::from([2]),
                ]),
            ),
        ];
        for (g, list) in cases {
            let fast = enumerate_mixed_stable_sets(&g, &list, false).unwrap();
            let slow = brute_force(&g, &list);
            assert_eq!(fast, slow, "mismatch on {} nodes", g.node_count);
        }
    }

    #[test]
    fn all_sets_pass_predicates() {
        let g = InteractionGraph::cycle(6);
        let list = SupportList::edges_of(&g);
        for s in enumerate_mixed_stable_sets(&g, &list, false).unwrap() {
            assert!(s.is_subordinate(&g, &list));
        }
    }

    #[test]
    fn edge_list_export() {
        let g = InteractionGraph::star(2);
        assert_eq!(g.to_edge_list(), "3\n0 1\n0 2\n");
    }
}
