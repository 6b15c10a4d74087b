//! Community detection and balanced packing of communities into machines.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Graph, NodeId, Result};

const LABEL_ROUNDS: usize = 10;
const LOUVAIN_PASSES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMethod {
    LabelPropagation,
    Louvain,
}

impl fmt::Display for PartitionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionMethod::LabelPropagation => "label_propagation",
            PartitionMethod::Louvain => "louvain",
        })
    }
}

impl FromStr for PartitionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label_propagation" | "lp" => Ok(PartitionMethod::LabelPropagation),
            "louvain" => Ok(PartitionMethod::Louvain),
            other => Err(Error::InvalidParameter(format!("unknown partition method {other:?}"))),
        }
    }
}

/// Splits the nodes into `m` disjoint sets of near-equal size, keeping
/// detected communities together where they fit.
pub fn partition(graph: &Graph, m: usize, method: PartitionMethod, seed: u64) -> Result<Vec<Vec<NodeId>>> {
    let n = graph.node_count();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("machine count must lie in 1..={n}, got {m}")));
    }
    let labels = match method {
        PartitionMethod::LabelPropagation => label_propagation(graph, seed),
        PartitionMethod::Louvain => louvain(graph, seed),
    };
    Ok(pack_communities(graph, &labels, m))
}

/// Asynchronous label propagation in seeded random node order. Each node
/// takes its neighbours' most frequent label (ties to the smallest label);
/// stops after a round without changes or after 10 rounds.
pub fn label_propagation(graph: &Graph, seed: u64) -> Vec<u32> {
    let n = graph.node_count();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for _ in 0..LABEL_ROUNDS {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &u in &order {
            if graph.degree(u) == 0 {
                continue;
            }
            counts.clear();
            for &v in graph.neighbors(u) {
                *counts.entry(labels[v as usize]).or_insert(0) += 1;
            }
            let best = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&l, _)| l)
                .expect("non-empty neighbourhood");
            let current = labels[u as usize];
            if best != current && counts[&best] > counts.get(&current).copied().unwrap_or(0) {
                labels[u as usize] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

/// Multi-level modularity optimisation (Louvain). Nodes are visited in a
/// seeded random order; moves go to the neighbouring community with the
/// largest gain, ties to the smallest community id.
pub fn louvain(graph: &Graph, seed: u64) -> Vec<u32> {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: Vec<u32> = (0..n as u32).collect();
    // Weighted level graph: neighbour lists without self-loops, plus loop
    // weights and weighted degrees.
    let mut adj: Vec<Vec<(u32, f64)>> = (0..n as NodeId)
        .map(|u| graph.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
        .collect();
    let mut loops = vec![0.0; n];
    let total: f64 = 2.0 * graph.edge_count() as f64;
    if total == 0.0 {
        return assignment;
    }
    loop {
        let k = adj.len();
        let degree: Vec<f64> = (0..k)
            .map(|i| adj[i].iter().map(|e| e.1).sum::<f64>() + 2.0 * loops[i])
            .collect();
        let mut comm: Vec<u32> = (0..k as u32).collect();
        let mut tot = degree.clone();
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut rng);
        let mut moved_any = false;
        let mut links: HashMap<u32, f64> = HashMap::new();
        for _ in 0..LOUVAIN_PASSES {
            let mut moved = false;
            for &i in &order {
                let own = comm[i];
                links.clear();
                for &(j, w) in &adj[i] {
                    *links.entry(comm[j as usize]).or_insert(0.0) += w;
                }
                tot[own as usize] -= degree[i];
                let gain = |c: u32, w: f64| w - tot[c as usize] * degree[i] / total;
                let mut best = own;
                let mut best_gain = gain(own, links.get(&own).copied().unwrap_or(0.0));
                let mut candidates: Vec<(u32, f64)> = links.iter().map(|(&c, &w)| (c, w)).collect();
                candidates.sort_unstable_by_key(|c| c.0);
                // Ascending ids with a strict test: staying wins ties, then
                // the smallest id.
                for (c, w) in candidates {
                    let g = gain(c, w);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best as usize] += degree[i];
                if best != own {
                    comm[i] = best;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        if !moved_any {
            break;
        }
        // Renumber communities and collapse them into nodes.
        let mut renumber: HashMap<u32, u32> = HashMap::new();
        let mut next_id = 0u32;
        for i in 0..k {
            renumber.entry(comm[i]).or_insert_with(|| {
                next_id += 1;
                next_id - 1
            });
        }
        let c = next_id as usize;
        let mut new_adj: Vec<HashMap<u32, f64>> = vec![HashMap::new(); c];
        let mut new_loops = vec![0.0; c];
        for i in 0..k {
            let ci = renumber[&comm[i]];
            new_loops[ci as usize] += loops[i];
            for &(j, w) in &adj[i] {
                let cj = renumber[&comm[j as usize]];
                if ci == cj {
                    // Each internal edge is seen from both ends.
                    new_loops[ci as usize] += w / 2.0;
                } else {
                    *new_adj[ci as usize].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        for a in assignment.iter_mut() {
            *a = renumber[&comm[*a as usize]];
        }
        adj = new_adj
            .into_iter()
            .map(|m| {
                let mut v: Vec<(u32, f64)> = m.into_iter().collect();
                v.sort_unstable_by_key(|e| e.0);
                v
            })
            .collect();
        loops = new_loops;
        if c == k {
            break;
        }
    }
    assignment
}

/// Packs labelled communities into `m` bins whose capacities differ by at
/// most one node. Communities go largest first (ties to the smallest member
/// id), each into the bin with the most free space; a community larger than
/// that space fills it and continues in the next bin, in BFS order so the
/// pieces stay connected where possible.
pub fn pack_communities(graph: &Graph, labels: &[u32], m: usize) -> Vec<Vec<NodeId>> {
    let n = graph.node_count();
    let mut groups: HashMap<u32, Vec<NodeId>> = HashMap::new();
    for (u, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(u as NodeId);
    }
    let mut communities: Vec<Vec<NodeId>> = groups.into_values().collect();
    communities.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let capacity: Vec<usize> = (0..m).map(|i| n / m + usize::from(i < n % m)).collect();
    let mut bins: Vec<Vec<NodeId>> = vec![Vec::new(); m];
    for community in communities {
        let nodes = bfs_order(graph, labels, &community);
        let mut rest = &nodes[..];
        while !rest.is_empty() {
            let bin = (0..m)
                .max_by(|&a, &b| {
                    let (fa, fb) = (capacity[a] - bins[a].len(), capacity[b] - bins[b].len());
                    fa.cmp(&fb).then(b.cmp(&a))
                })
                .expect("m >= 1");
            let free = capacity[bin] - bins[bin].len();
            let take = free.min(rest.len());
            bins[bin].extend_from_slice(&rest[..take]);
            rest = &rest[take..];
        }
    }
    for b in bins.iter_mut() {
        b.sort_unstable();
    }
    bins
}

fn bfs_order(graph: &Graph, labels: &[u32], community: &[NodeId]) -> Vec<NodeId> {
    let label = labels[community[0] as usize];
    let mut seen: HashMap<NodeId, ()> = HashMap::with_capacity(community.len());
    let mut out = Vec::with_capacity(community.len());
    let mut queue = VecDeque::new();
    for &start in community {
        if seen.insert(start, ()).is_some() {
            continue;
        }
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            out.push(u);
            for &v in graph.neighbors(u) {
                if labels[v as usize] == label && seen.insert(v, ()).is_none() {
                    queue.push_back(v);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_ba;

    fn two_cliques() -> Graph {
        let mut edges = Vec::new();
        for base in [0u32, 50] {
            for u in base..base + 50 {
                for v in u + 1..base + 50 {
                    edges.push((u, v));
                }
            }
        }
        edges.push((0, 50));
        Graph::from_edges(100, edges).unwrap()
    }

    fn covers(parts: &[Vec<NodeId>], n: usize) -> bool {
        let mut all: Vec<NodeId> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        all == (0..n as NodeId).collect::<Vec<_>>()
    }

    #[test]
    fn single_machine_gets_everything() {
        let g = generate_ba(50, 2, 1).unwrap();
        let parts = partition(&g, 1, PartitionMethod::LabelPropagation, 0).unwrap();
        assert_eq!(parts, vec![(0..50).collect::<Vec<_>>()]);
        assert!(partition(&g, 51, PartitionMethod::Louvain, 0).is_err());
        assert!(partition(&g, 0, PartitionMethod::Louvain, 0).is_err());
    }

    #[test]
    fn cliques_split_cleanly() {
        let g = two_cliques();
        for method in [PartitionMethod::LabelPropagation, PartitionMethod::Louvain] {
            let parts = partition(&g, 2, method, 7).unwrap();
            assert!(covers(&parts, 100));
            for p in &parts {
                let low = p.iter().filter(|&&u| u < 50).count();
                assert!(low <= 1 || low >= 49, "{method}: {low}");
            }
        }
    }

    #[test]
    fn bins_are_balanced() {
        let g = generate_ba(5000, 3, 2).unwrap();
        for method in [PartitionMethod::LabelPropagation, PartitionMethod::Louvain] {
            let parts = partition(&g, 8, method, 1).unwrap();
            assert!(covers(&parts, 5000));
            let sizes: Vec<usize> = parts.iter().map(|p| p.len()).collect();
            let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
            assert!(hi <= 2 * lo, "{sizes:?}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = generate_ba(400, 2, 9).unwrap();
        for method in [PartitionMethod::LabelPropagation, PartitionMethod::Louvain] {
            assert_eq!(partition(&g, 3, method, 5).unwrap(), partition(&g, 3, method, 5).unwrap());
        }
    }

    #[test]
    fn no_empty_bins() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let parts = pack_communities(&g, &[0; 5], 4);
        assert_eq!(parts.iter().map(|p| p.len()).collect::<Vec<_>>(), vec![2, 1, 1, 1]);
    }

    #[test]
    fn louvain_modularity_beats_singletons() {
        let g = two_cliques();
        let labels = louvain(&g, 3);
        let distinct: std::collections::BTreeSet<u32> = labels.iter().copied().collect();
        assert_eq!(distinct.len(), 2);
    }
}
