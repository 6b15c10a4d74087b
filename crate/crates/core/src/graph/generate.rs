//! Seeded Barabási–Albert and Watts–Strogatz generators.
//!
//! Both follow the usual constructions (the same ones as networkx); given
//! identical parameters and seed the edge sets are bitwise identical.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::{Error, NodeId, Result};

/// Preferential attachment: `m` isolated seed nodes, then every new node
/// attaches to `m` distinct existing nodes drawn proportionally to degree.
/// Yields exactly `m * (n - m)` edges.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || n <= m {
        return Err(Error::InvalidParameter(format!(
            "Barabási–Albert needs n > m >= 1 (n={n}, m={m})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m * (n - m));
    let mut repeated: Vec<NodeId> = Vec::with_capacity(2 * m * (n - m));
    let mut targets: Vec<NodeId> = (0..m as NodeId).collect();
    for source in m as NodeId..n as NodeId {
        for &t in &targets {
            edges.push((source, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat(source).take(m));
        if source as usize + 1 == n {
            break;
        }
        targets.clear();
        while targets.len() < m {
            let pick = repeated[rng.gen_range(0..repeated.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Two preferential-attachment graphs of `n_each` nodes (ids `0..n_each`
/// and `n_each..2 n_each`) joined by `bridges` distinct random edges.
pub fn generate_two_community(n_each: usize, m: usize, bridges: usize, seed: u64) -> Result<Graph> {
    if bridges > n_each * n_each {
        return Err(Error::InvalidParameter(format!(
            "{bridges} bridges do not fit between two groups of {n_each}"
        )));
    }
    let left = generate_ba(n_each, m, seed)?;
    let right = generate_ba(n_each, m, seed.wrapping_add(1))?;
    let offset = n_each as NodeId;
    let mut edges: Vec<(NodeId, NodeId)> = left.edges().collect();
    edges.extend(right.edges().map(|(u, v)| (u + offset, v + offset)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut joined = BTreeSet::new();
    while joined.len() < bridges {
        let u = rng.gen_range(0..offset);
        let v = rng.gen_range(0..offset) + offset;
        joined.insert((u, v));
    }
    edges.extend(joined);
    Graph::from_edges(2 * n_each, edges)
}

/// Small-world ring lattice with rewiring. Every node starts linked to its
/// `k / 2` nearest neighbours on each side; each lattice edge `(u, u + j)` is
/// then rewired to `(u, w)` with probability `p`, avoiding self-loops and
/// duplicates, so the edge count stays `n * k / 2`.
pub fn generate_ws(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph> {
    if k < 2 || k % 2 != 0 || n <= k {
        return Err(Error::InvalidParameter(format!(
            "Watts–Strogatz needs n > k >= 2 with k even (n={n}, k={k})"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "rewiring probability must be in [0, 1], got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.gen::<f64>() >= p {
                continue;
            }
            let mut w = rng.gen_range(0..n);
            let mut saturated = false;
            while w == u || adj[u].contains(&w) {
                if adj[u].len() >= n - 1 {
                    saturated = true;
                    break;
                }
                w = rng.gen_range(0..n);
            }
            if saturated {
                continue;
            }
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges = adj.iter().enumerate().flat_map(|(u, ns)| {
        ns.iter()
            .filter(move |&&v| u < v)
            .map(move |&v| (u as NodeId, v as NodeId))
    });
    Graph::from_edges(n, edges)
}
