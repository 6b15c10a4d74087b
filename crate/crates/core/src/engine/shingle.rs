//! Min-hash shingles over closed neighbourhoods and candidate grouping.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Graph, NodeId, Result, SummaryGraph, SupernodeId};

/// A uniformly random bijection `V -> {1..|V|}` (Fisher–Yates).
pub fn random_permutation<R: Rng + ?Sized>(node_count: usize, rng: &mut R) -> Vec<u32> {
    let mut hash: Vec<u32> = (1..=node_count as u32).collect();
    hash.shuffle(rng);
    hash
}

/// `min_{v in N(u) ∪ {u}} hash(v)`.
#[inline]
fn node_shingle(graph: &Graph, hash: &[u32], u: NodeId) -> u32 {
    graph
        .neighbors(u)
        .iter()
        .fold(hash[u as usize], |m, &v| m.min(hash[v as usize]))
}

/// Shingle of a supernode: the minimum hash over the closed neighbourhoods of
/// all its members.
pub fn shingle(summary: &SummaryGraph, graph: &Graph, hash: &[u32], a: SupernodeId) -> Result<u32> {
    summary.check_live(a)?;
    Ok(supernode_shingle(summary, graph, hash, a))
}

fn supernode_shingle(summary: &SummaryGraph, graph: &Graph, hash: &[u32], a: SupernodeId) -> u32 {
    summary
        .members(a)
        .iter()
        .map(|&u| node_shingle(graph, hash, u))
        .min()
        .expect("live supernode has members")
}

/// Splits `supernodes` into groups of equal shingle under `hash`, ordered by
/// shingle value. Singleton groups are kept.
pub fn group_by_shingle(
    summary: &SummaryGraph,
    graph: &Graph,
    hash: &[u32],
    supernodes: &[SupernodeId],
) -> Vec<Vec<SupernodeId>> {
    // Stable sort keeps input order inside each group.
    let mut keyed: Vec<(u32, SupernodeId)> = supernodes
        .iter()
        .map(|&a| (supernode_shingle(summary, graph, hash, a), a))
        .collect();
    keyed.sort_by_key(|&(f, _)| f);
    keyed
        .chunk_by(|x, y| x.0 == y.0)
        .map(|run| run.iter().map(|&(_, a)| a).collect())
        .collect()
}

/// Candidate groups for one iteration.
///
/// Live supernodes are grouped by shingle under a fresh permutation; groups
/// larger than `group_cap` are re-grouped with a fresh permutation for up to
/// `rounds` further passes, and whatever is still too large is shuffled and
/// cut into chunks of at most `group_cap`. Groups of one are dropped.
pub fn generate_candidates<R: Rng + ?Sized>(
    summary: &SummaryGraph,
    graph: &Graph,
    group_cap: usize,
    rounds: usize,
    rng: &mut R,
) -> Vec<Vec<SupernodeId>> {
    let n = graph.node_count();
    let live: Vec<SupernodeId> = summary.live_supernodes().collect();
    let hash = random_permutation(n, rng);
    let mut groups = group_by_shingle(summary, graph, &hash, &live);

    for _ in 0..rounds {
        if groups.iter().all(|g| g.len() <= group_cap) {
            break;
        }
        let hash = random_permutation(n, rng);
        let mut next = Vec::with_capacity(groups.len());
        for group in groups {
            if group.len() > group_cap {
                next.extend(group_by_shingle(summary, graph, &hash, &group));
            } else {
                next.push(group);
            }
        }
        groups = next;
    }

    let mut out = Vec::with_capacity(groups.len());
    for mut group in groups {
        if group.len() < 2 {
            continue;
        }
        if group.len() <= group_cap {
            out.push(group);
            continue;
        }
        group.shuffle(rng);
        out.extend(
            group
                .chunks(group_cap)
                .filter(|c| c.len() >= 2)
                .map(|c| c.to_vec()),
        );
    }
    out
}
