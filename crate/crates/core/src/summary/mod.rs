//! Summary graphs: a partition of the nodes into supernodes plus a set of
//! superedges (self-pairs allowed). Node `u != v` is adjacent to `v` in the
//! reconstructed graph iff `{S_u, S_v}` is a superedge.

mod cost;
mod pgs;

pub use cost::{
    error_unit_bits, optimal_superedge_choice, pair_cost, pair_stats, personalized_error,
    personalized_error_reconstructed, supernode_cost, total_cost, total_cost_reconstructed,
    CostModel, PairStats,
};
pub(crate) use cost::{log2, NeighborProfile, ProfileEntry, ProfileScratch};
pub use pgs::{read_pgs, write_pgs};

use std::collections::BTreeSet;

use crate::{Error, Graph, NodeId, Result, SupernodeId};

/// Largest graph [`SummaryGraph::reconstruct`] accepts without the override.
pub const RECONSTRUCT_LIMIT: usize = 5_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryGraph {
    membership: Vec<SupernodeId>,
    /// Sorted member lists; empty for dead ids.
    members: Vec<Vec<NodeId>>,
    /// Superedge neighbours per supernode; contains `a` itself for a self-loop.
    adjacency: Vec<BTreeSet<SupernodeId>>,
    live: usize,
    superedges: usize,
}

impl SummaryGraph {
    /// Singleton supernodes with one superedge per input edge.
    pub fn initial(graph: &Graph) -> Self {
        let n = graph.node_count();
        let adjacency = (0..n as NodeId)
            .map(|u| graph.neighbors(u).iter().copied().collect())
            .collect();
        SummaryGraph {
            membership: (0..n as SupernodeId).collect(),
            members: (0..n as NodeId).map(|u| vec![u]).collect(),
            adjacency,
            live: n,
            superedges: graph.edge_count(),
        }
    }

    /// Builds a summary from a membership table and superedge list. Supernode
    /// ids must lie in `0..membership.len()`; unused ids are simply dead.
    pub fn from_parts(
        membership: Vec<SupernodeId>,
        superedges: &[(SupernodeId, SupernodeId)],
    ) -> Result<Self> {
        let n = membership.len();
        let mut members = vec![Vec::new(); n];
        for (u, &a) in membership.iter().enumerate() {
            if a as usize >= n {
                return Err(Error::InvalidSummary(format!(
                    "node {u} maps to supernode {a} outside 0..{n}"
                )));
            }
            members[a as usize].push(u as NodeId);
        }
        let live = members.iter().filter(|m| !m.is_empty()).count();
        let mut summary = SummaryGraph {
            membership,
            members,
            adjacency: vec![BTreeSet::new(); n],
            live,
            superedges: 0,
        };
        for &(a, b) in superedges {
            for x in [a, b] {
                if !summary.is_live(x) {
                    return Err(Error::InvalidSummary(format!(
                        "superedge ({a}, {b}) references missing supernode {x}"
                    )));
                }
            }
            if a == b && summary.members(a).len() < 2 {
                return Err(Error::InvalidSummary(format!(
                    "self-loop on singleton supernode {a}"
                )));
            }
            if !summary.add_superedge(a, b) {
                return Err(Error::InvalidSummary(format!("duplicate superedge ({a}, {b})")));
            }
        }
        Ok(summary)
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    /// Number of live supernodes, `|S|`.
    pub fn supernode_count(&self) -> usize {
        self.live
    }

    /// `|P|`, self-loops included.
    pub fn superedge_count(&self) -> usize {
        self.superedges
    }

    #[inline]
    pub fn supernode_of(&self, u: NodeId) -> SupernodeId {
        self.membership[u as usize]
    }

    pub fn membership(&self) -> &[SupernodeId] {
        &self.membership
    }

    #[inline]
    pub fn members(&self, a: SupernodeId) -> &[NodeId] {
        self.members.get(a as usize).map_or(&[], |m| m.as_slice())
    }

    #[inline]
    pub fn is_live(&self, a: SupernodeId) -> bool {
        !self.members(a).is_empty()
    }

    pub(crate) fn check_live(&self, a: SupernodeId) -> Result<()> {
        if self.is_live(a) {
            Ok(())
        } else {
            Err(Error::DeadSupernode(a))
        }
    }

    pub fn live_supernodes(&self) -> impl Iterator<Item = SupernodeId> + '_ {
        (0..self.members.len() as SupernodeId).filter(move |&a| self.is_live(a))
    }

    /// Superedge neighbours of `a` in ascending order (`a` itself when it
    /// carries a self-loop).
    pub fn superedge_neighbors(&self, a: SupernodeId) -> impl Iterator<Item = SupernodeId> + '_ {
        self.adjacency[a as usize].iter().copied()
    }

    pub(crate) fn superedge_degree(&self, a: SupernodeId) -> usize {
        self.adjacency[a as usize].len()
    }

    pub fn has_superedge(&self, a: SupernodeId, b: SupernodeId) -> bool {
        self.adjacency
            .get(a as usize)
            .is_some_and(|adj| adj.contains(&b))
    }

    /// Canonical `(a, b)` pairs with `a <= b`, sorted.
    pub fn superedges(&self) -> Vec<(SupernodeId, SupernodeId)> {
        let mut out = Vec::with_capacity(self.superedges);
        for (a, adj) in self.adjacency.iter().enumerate() {
            let a = a as SupernodeId;
            out.extend(adj.range(a..).map(|&b| (a, b)));
        }
        out
    }

    /// Bits to encode the summary: `2 |P| log2 |S| + |V| log2 |S|`.
    pub fn size_bits(&self) -> f64 {
        size_bits(self.live, self.superedges, self.node_count())
    }

    /// Neighbours of `q` in the reconstructed graph, without reconstructing it.
    pub fn approximate_neighbors(&self, q: NodeId) -> Vec<NodeId> {
        let sq = self.supernode_of(q);
        let mut out = Vec::new();
        for x in self.superedge_neighbors(sq) {
            out.extend(self.members(x).iter().copied().filter(|&v| v != q));
        }
        out
    }

    /// Size of `q`'s reconstructed neighbourhood.
    pub fn approximate_degree(&self, q: NodeId) -> usize {
        let sq = self.supernode_of(q);
        self.superedge_neighbors(sq)
            .map(|x| self.members(x).len())
            .sum::<usize>()
            - usize::from(self.has_superedge(sq, sq))
    }

    /// Materializes the reconstructed graph. Refuses more than
    /// [`RECONSTRUCT_LIMIT`] nodes unless `force` is set.
    pub fn reconstruct(&self, force: bool) -> Result<Graph> {
        let n = self.node_count();
        if n > RECONSTRUCT_LIMIT && !force {
            return Err(Error::SizeGuard {
                what: "reconstruction",
                size: n,
                limit: RECONSTRUCT_LIMIT,
            });
        }
        let mut edges = Vec::new();
        for (a, b) in self.superedges() {
            let ma = self.members(a);
            if a == b {
                for (i, &u) in ma.iter().enumerate() {
                    edges.extend(ma[i + 1..].iter().map(|&v| (u, v)));
                }
            } else {
                for &u in ma {
                    edges.extend(self.members(b).iter().map(|&v| (u, v)));
                }
            }
        }
        Graph::from_edges(n, edges)
    }

    /// Same summary with supernodes renumbered `0..|S|` in order of their
    /// smallest member.
    pub fn canonical(&self) -> SummaryGraph {
        let mut new_id = vec![SupernodeId::MAX; self.members.len()];
        let mut next = 0;
        for u in 0..self.node_count() as NodeId {
            let a = self.supernode_of(u) as usize;
            if new_id[a] == SupernodeId::MAX {
                new_id[a] = next;
                next += 1;
            }
        }
        let membership = self.membership.iter().map(|&a| new_id[a as usize]).collect();
        let superedges: Vec<_> = self
            .superedges()
            .into_iter()
            .map(|(a, b)| {
                let (x, y) = (new_id[a as usize], new_id[b as usize]);
                (x.min(y), x.max(y))
            })
            .collect();
        SummaryGraph::from_parts(membership, &superedges).expect("renumbering a valid summary")
    }

    pub(crate) fn add_superedge(&mut self, a: SupernodeId, b: SupernodeId) -> bool {
        let inserted = self.adjacency[a as usize].insert(b);
        if inserted {
            if a != b {
                self.adjacency[b as usize].insert(a);
            }
            self.superedges += 1;
        }
        inserted
    }

    pub(crate) fn remove_superedge(&mut self, a: SupernodeId, b: SupernodeId) -> bool {
        let removed = self.adjacency[a as usize].remove(&b);
        if removed {
            if a != b {
                self.adjacency[b as usize].remove(&a);
            }
            self.superedges -= 1;
        }
        removed
    }

    /// `(kept, gone)` for a merge of `a` and `b`.
    pub(crate) fn merge_survivor(&self, a: SupernodeId, b: SupernodeId) -> (SupernodeId, SupernodeId) {
        let (la, lb) = (self.members(a).len(), self.members(b).len());
        if la > lb || (la == lb && a < b) {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Merges `a` and `b`, dropping every superedge incident to either.
    /// Returns the id that survives (the larger supernode, ties to the
    /// smaller id).
    pub(crate) fn merge(&mut self, a: SupernodeId, b: SupernodeId) -> SupernodeId {
        debug_assert!(a != b && self.is_live(a) && self.is_live(b));
        for x in [a, b] {
            let adj = std::mem::take(&mut self.adjacency[x as usize]);
            for y in adj {
                if y == x {
                    self.superedges -= 1;
                } else if self.adjacency[y as usize].remove(&x) {
                    self.superedges -= 1;
                }
            }
        }
        let (keep, gone) = self.merge_survivor(a, b);
        let moved = std::mem::take(&mut self.members[gone as usize]);
        for &u in &moved {
            self.membership[u as usize] = keep;
        }
        let kept = std::mem::take(&mut self.members[keep as usize]);
        self.members[keep as usize] = merge_sorted(&kept, &moved);
        self.live -= 1;
        keep
    }
}

pub(crate) fn size_bits(supernodes: usize, superedges: usize, nodes: usize) -> f64 {
    if supernodes <= 1 {
        return 0.0;
    }
    let lg = (supernodes as f64).log2();
    2.0 * superedges as f64 * lg + nodes as f64 * lg
}

fn merge_sorted(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn toy() -> Graph {
        Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    /// {a,b}=0, {c,d}=2, {e}=4 with superedges AB–CD and CD–E.
    pub(crate) fn fig3a() -> SummaryGraph {
        SummaryGraph::from_parts(vec![0, 0, 2, 2, 4], &[(0, 2), (2, 4)]).unwrap()
    }

    /// {a,d}=0, {b,c}=1, {e}=4 with the cross superedge and both self-loops.
    pub(crate) fn fig3b() -> SummaryGraph {
        SummaryGraph::from_parts(vec![0, 1, 1, 0, 4], &[(0, 1), (0, 0), (1, 1)]).unwrap()
    }

    #[test]
    fn initial_reconstructs_exactly() {
        let g = toy();
        let s = SummaryGraph::initial(&g);
        assert_eq!(s.supernode_count(), 5);
        assert_eq!(s.superedge_count(), 6);
        assert_eq!(s.reconstruct(false).unwrap(), g);
        let empty = Graph::from_edges(4, []).unwrap();
        assert_eq!(SummaryGraph::initial(&empty).superedge_count(), 0);
    }

    #[test]
    fn fig3a_reconstruction() {
        assert_eq!(fig3a().reconstruct(false).unwrap(), toy());
    }

    #[test]
    fn fig3b_reconstruction() {
        let r = fig3b().reconstruct(false).unwrap();
        let got: Vec<_> = r.edges().collect();
        // a=0 b=1 c=2 d=3: ab, ac, bd, cd from the cross superedge; ad, bc from self-loops.
        assert_eq!(got, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn no_superedges_no_edges() {
        let s = SummaryGraph::from_parts(vec![0, 0, 2], &[]).unwrap();
        assert_eq!(s.reconstruct(false).unwrap().edge_count(), 0);
    }

    #[test]
    fn size_bits_values() {
        let three = 3f64.log2();
        assert!((fig3a().size_bits() - 9.0 * three).abs() < 1e-12);
        assert!((fig3a().size_bits() - 14.2647).abs() < 1e-4);
        let init = SummaryGraph::initial(&toy());
        assert!((init.size_bits() - 17.0 * 5f64.log2()).abs() < 1e-12);
        assert!((init.size_bits() - 39.4728).abs() < 1e-4);
        let one = SummaryGraph::from_parts(vec![0, 0, 0], &[(0, 0)]).unwrap();
        assert_eq!(one.size_bits(), 0.0);
    }

    #[test]
    fn invalid_parts() {
        assert!(SummaryGraph::from_parts(vec![0, 5], &[]).is_err());
        assert!(SummaryGraph::from_parts(vec![0, 1], &[(0, 0)]).is_err());
        assert!(SummaryGraph::from_parts(vec![0, 0], &[(0, 1)]).is_err());
        assert!(SummaryGraph::from_parts(vec![0, 1], &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn merge_drops_incident_superedges() {
        let mut s = SummaryGraph::initial(&toy());
        let kept = s.merge(0, 1);
        assert_eq!(kept, 0);
        assert_eq!(s.members(0), &[0, 1]);
        assert!(!s.is_live(1));
        assert_eq!(s.supernode_count(), 4);
        // Removed a–c, a–d, b–c, b–d.
        assert_eq!(s.superedge_count(), 2);
        assert_eq!(s.superedges(), vec![(2, 4), (3, 4)]);
        s.add_superedge(0, 2);
        s.add_superedge(0, 0);
        let kept = s.merge(2, 0);
        assert_eq!(kept, 0);
        assert_eq!(s.members(0), &[0, 1, 2]);
        assert_eq!(s.superedges(), vec![(3, 4)]);
    }

    #[test]
    fn approximate_neighbors_follow_reconstruction() {
        let s = fig3a();
        assert_eq!(s.approximate_neighbors(0), vec![2, 3]);
        let mut n = s.approximate_neighbors(2);
        n.sort();
        assert_eq!(n, vec![0, 1, 4]);
        assert_eq!(s.approximate_degree(2), 3);
        let b = fig3b();
        let mut n = b.approximate_neighbors(0);
        n.sort();
        assert_eq!(n, vec![1, 2, 3]);
        assert_eq!(b.approximate_degree(0), 3);
    }

    #[test]
    fn canonical_renumbers_by_smallest_member() {
        let s = SummaryGraph::from_parts(vec![3, 3, 1, 1, 0], &[(1, 3), (0, 1)]).unwrap();
        let c = s.canonical();
        assert_eq!(c.membership(), &[0, 0, 1, 1, 2]);
        assert_eq!(c.superedges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn reconstruct_guard() {
        let g = Graph::from_edges(RECONSTRUCT_LIMIT + 1, [(0, 1)]).unwrap();
        let s = SummaryGraph::initial(&g);
        assert!(matches!(s.reconstruct(false), Err(Error::SizeGuard { .. })));
        assert_eq!(s.reconstruct(true).unwrap().edge_count(), 1);
    }
}
