use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Graph;
use crate::{Error, NodeId, Result};

const EXACT_LIMIT: usize = 20_000;
const SAMPLED_PAIRS: usize = 100_000;

/// Smallest hop count `h` such that at least `percentile` of ordered
/// reachable pairs `(u, v)`, `u != v`, lie within `h` hops.
///
/// Exact all-pairs BFS up to 20,000 nodes; above that, BFS from uniformly
/// sampled sources until at least 100,000 pairs are covered.
pub fn effective_diameter(graph: &Graph, percentile: f64) -> Result<f64> {
    if !(percentile > 0.0 && percentile <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "percentile must be in (0, 1], got {percentile}"
        )));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = graph.node_count();
    if n < 2 {
        return Ok(0.0);
    }
    let sources: Vec<NodeId> = if n <= EXACT_LIMIT {
        (0..n as NodeId).collect()
    } else {
        let count = SAMPLED_PAIRS.div_ceil(n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0x0d1a);
        (0..count).map(|_| rng.gen_range(0..n as NodeId)).collect()
    };

    let histogram = sources
        .par_iter()
        .map(|&s| hop_histogram(graph, s))
        .reduce(Vec::new, |mut a, b| {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (i, c) in b.into_iter().enumerate() {
                a[i] += c;
            }
            a
        });

    let total: u64 = histogram.iter().sum();
    let needed = percentile * total as f64;
    let mut cumulative = 0u64;
    for (h, &c) in histogram.iter().enumerate() {
        cumulative += c;
        // Guard against `percentile * total` rounding just above an integer.
        if cumulative as f64 >= needed - 1e-9 * total as f64 {
            return Ok(h as f64);
        }
    }
    Ok((histogram.len().saturating_sub(1)) as f64)
}

/// `hist[h]` = number of nodes at exactly `h` hops from `source` (h >= 1).
fn hop_histogram(graph: &Graph, source: NodeId) -> Vec<u64> {
    let mut dist = vec![u32::MAX; graph.node_count()];
    let mut hist = vec![0u64];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &v in graph.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                let dv = du + 1;
                dist[v as usize] = dv;
                if hist.len() <= dv as usize {
                    hist.push(0);
                }
                hist[dv as usize] += 1;
                queue.push_back(v);
            }
        }
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_ws;

    #[test]
    fn path_and_complete() {
        let path = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(effective_diameter(&path, 1.0).unwrap(), 4.0);
        let k10 = Graph::from_edges(
            10,
            (0..10).flat_map(|u| ((u + 1)..10).map(move |v| (u, v))),
        )
        .unwrap();
        for p in [0.1, 0.5, 0.9, 1.0] {
            assert_eq!(effective_diameter(&k10, p).unwrap(), 1.0);
        }
    }

    #[test]
    fn toy_ninety_percent() {
        let g = Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        // Oracle: 6 unordered pairs at distance 1, 4 at distance 2.
        assert_eq!(effective_diameter(&g, 0.9).unwrap(), 2.0);
        assert_eq!(effective_diameter(&g, 0.6).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(effective_diameter(&g, 0.9), Err(Error::Disconnected)));
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(effective_diameter(&g, 0.0).is_err());
        assert!(effective_diameter(&g, 1.5).is_err());
    }

    #[test]
    fn rewiring_shrinks_diameter() {
        let lattice = generate_ws(1000, 20, 0.0, 1).unwrap();
        let rewired = generate_ws(1000, 20, 0.1, 1).unwrap();
        let d0 = effective_diameter(&lattice, 0.9).unwrap();
        let d1 = effective_diameter(&rewired, 0.9).unwrap();
        assert!(d1 < d0, "{d1} !< {d0}");
    }
}
