//! Immutable undirected simple graphs in compressed adjacency form.

mod diameter;
mod generate;
mod io;

pub use diameter::effective_diameter;
pub use generate::{generate_ba, generate_two_community, generate_ws};
pub use io::{load_edge_list, parse_edge_list, write_edge_list, write_id_map, LoadedGraph};

use std::collections::VecDeque;

use crate::{Error, NodeId, Result};

/// Undirected simple graph. Neighbor lists are sorted, symmetric and free of
/// self-loops and duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph on `node_count` nodes. Duplicate and reverse edges are
    /// collapsed; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if node_count > NodeId::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "node count {node_count} exceeds the id space"
            )));
        }
        let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= node_count {
                    return Err(Error::InvalidNode {
                        node: x as u64,
                        node_count,
                    });
                }
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop on node {u}")));
            }
            pairs.push((u, v));
            pairs.push((v, u));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut offsets = vec![0usize; node_count + 1];
        for &(u, _) in &pairs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.into_iter().map(|(_, v)| v).collect();
        Ok(Graph { offsets, targets })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Bits to encode the graph: `2 |E| log2 |V|`.
    pub fn size_bits(&self) -> f64 {
        2.0 * self.edge_count() as f64 * (self.node_count() as f64).log2()
    }

    /// Multi-source BFS hop distances; `None` for unreachable nodes.
    pub fn bfs_distances(&self, sources: &[NodeId]) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize].is_none() {
                dist[s as usize] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize].unwrap();
            for &v in self.neighbors(u) {
                if dist[v as usize].is_none() {
                    dist[v as usize] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Component label per node, numbered in order of each component's
    /// smallest node id.
    pub fn connected_components(&self) -> Vec<u32> {
        let n = self.node_count();
        let mut label = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != u32::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start as NodeId);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v as usize] == u32::MAX {
                        label[v as usize] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.connected_components().iter().all(|&c| c == 0)
    }

    /// The graph induced by `keep` (sorted ascending), relabelled densely in
    /// that order.
    pub fn induced(&self, keep: &[NodeId]) -> Graph {
        let mut new_id = vec![NodeId::MAX; self.node_count()];
        for (i, &u) in keep.iter().enumerate() {
            new_id[u as usize] = i as NodeId;
        }
        let edges = self
            .edges()
            .filter(|&(u, v)| new_id[u as usize] != NodeId::MAX && new_id[v as usize] != NodeId::MAX)
            .map(|(u, v)| (new_id[u as usize], new_id[v as usize]));
        Graph::from_edges(keep.len(), edges).expect("induced subgraph of a valid graph")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy() -> Graph {
        // a=0 b=1 c=2 d=3 e=4
        Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn toy_shape() {
        let g = toy();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.neighbors(2), &[0, 1, 4]);
        assert!(g.has_edge(4, 3));
        assert!(!g.has_edge(0, 1));
    }

    #[test]
    fn size_bits_values() {
        assert!((toy().size_bits() - 12.0 * 5f64.log2()).abs() < 1e-12);
        assert!((toy().size_bits() - 27.863137138648348).abs() < 1e-9);
        assert_eq!(Graph::from_edges(3, []).unwrap().size_bits(), 0.0);
        assert_eq!(Graph::from_edges(2, [(0, 1)]).unwrap().size_bits(), 2.0);
    }

    #[test]
    fn duplicates_collapse_and_self_loops_rejected() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (0, 1), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn components_and_induced() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(g.connected_components(), vec![0, 0, 0, 1, 1, 2]);
        assert!(!g.is_connected());
        let h = g.induced(&[3, 4, 5]);
        assert_eq!(h.edge_count(), 1);
        assert_eq!(h.neighbors(0), &[1]);
    }

    #[test]
    fn bfs_from_a() {
        let d = toy().bfs_distances(&[0]);
        assert_eq!(d, vec![Some(0), Some(2), Some(1), Some(1), Some(2)]);
    }
}
