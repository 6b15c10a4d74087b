//! Neighborhood, HOP, RWR and PHP queries.
//!
//! Every query runs against a [`Topology`]: either a raw [`Graph`] (the exact
//! answer) or a [`SummaryTopology`], which reads neighborhoods off the
//! summary without reconstructing it. On a summary, one multiplication by the
//! adjacency matrix costs `O(|V| + |P|)`: each node collects the member sums
//! of the supernodes adjacent to its own.

mod output;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use output::{top_k, write_tsv};

use crate::{Error, Graph, NodeId, Result, SummaryGraph};

/// Read access to a (possibly reconstructed) undirected graph.
pub trait Topology {
    fn node_count(&self) -> usize;

    fn degree(&self, u: NodeId) -> usize;

    /// `out = A x` where `A` is the adjacency matrix.
    fn adj_mul(&self, x: &[f64], out: &mut [f64]);

    /// BFS hop distances from `q`; `None` for unreachable nodes.
    fn hop_distances(&self, q: NodeId) -> Vec<Option<u32>>;

    fn check_node(&self, q: NodeId) -> Result<()> {
        if (q as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node: q as u64,
                node_count: self.node_count(),
            })
        }
    }
}

impl Topology for Graph {
    fn node_count(&self) -> usize {
        Graph::node_count(self)
    }

    fn degree(&self, u: NodeId) -> usize {
        Graph::degree(self, u)
    }

    fn adj_mul(&self, x: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            *o = self.neighbors(v as NodeId).iter().map(|&u| x[u as usize]).sum();
        }
    }

    fn hop_distances(&self, q: NodeId) -> Vec<Option<u32>> {
        self.bfs_distances(&[q])
    }
}

/// A summary viewed as the graph it reconstructs.
#[derive(Debug, Clone)]
pub struct SummaryTopology<'a> {
    summary: &'a SummaryGraph,
    /// Reconstructed degree shared by every member, per supernode id.
    degree: Vec<usize>,
    self_loop: Vec<bool>,
}

impl<'a> SummaryTopology<'a> {
    pub fn new(summary: &'a SummaryGraph) -> Self {
        let n = summary.node_count();
        let mut degree = vec![0; n];
        let mut self_loop = vec![false; n];
        for a in summary.live_supernodes() {
            let mut d = 0;
            for x in summary.superedge_neighbors(a) {
                d += summary.members(x).len();
                if x == a {
                    self_loop[a as usize] = true;
                    d -= 1;
                }
            }
            degree[a as usize] = d;
        }
        SummaryTopology {
            summary,
            degree,
            self_loop,
        }
    }

    pub fn summary(&self) -> &'a SummaryGraph {
        self.summary
    }
}

impl Topology for SummaryTopology<'_> {
    fn node_count(&self) -> usize {
        self.summary.node_count()
    }

    fn degree(&self, u: NodeId) -> usize {
        self.degree[self.summary.supernode_of(u) as usize]
    }

    fn adj_mul(&self, x: &[f64], out: &mut [f64]) {
        let s = self.summary;
        let mut member_sum = vec![0.0; s.node_count()];
        for (u, &xu) in x.iter().enumerate() {
            member_sum[s.supernode_of(u as NodeId) as usize] += xu;
        }
        let mut gathered = vec![0.0; s.node_count()];
        for a in s.live_supernodes() {
            gathered[a as usize] = s.superedge_neighbors(a).map(|y| member_sum[y as usize]).sum();
        }
        for (u, o) in out.iter_mut().enumerate() {
            let a = s.supernode_of(u as NodeId) as usize;
            *o = gathered[a];
            if self.self_loop[a] {
                *o -= x[u];
            }
        }
    }

    fn hop_distances(&self, q: NodeId) -> Vec<Option<u32>> {
        // Each supernode is expanded once, by the first dequeued node adjacent
        // to it; that node has the smallest distance among X's neighbours.
        let s = self.summary;
        let mut dist = vec![None; s.node_count()];
        let mut expanded = vec![false; s.node_count()];
        let mut queue = std::collections::VecDeque::new();
        dist[q as usize] = Some(0);
        queue.push_back(q);
        while let Some(u) = queue.pop_front() {
            let d = dist[u as usize].expect("queued nodes have a distance");
            for x in s.superedge_neighbors(s.supernode_of(u)) {
                if std::mem::replace(&mut expanded[x as usize], true) {
                    continue;
                }
                for &v in s.members(x) {
                    if dist[v as usize].is_none() {
                        dist[v as usize] = Some(d + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        dist
    }
}

/// Approximate neighbours of `q`: members of every supernode adjacent to
/// `q`'s supernode, without `q` itself.
pub fn get_neighbors(summary: &SummaryGraph, q: NodeId) -> Result<Vec<NodeId>> {
    if q as usize >= summary.node_count() {
        return Err(Error::InvalidNode {
            node: q as u64,
            node_count: summary.node_count(),
        });
    }
    Ok(summary.approximate_neighbors(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Rwr,
    Hop,
    Php,
}

impl QueryKind {
    pub const ALL: [QueryKind; 3] = [QueryKind::Rwr, QueryKind::Hop, QueryKind::Php];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Rwr => "rwr",
            QueryKind::Hop => "hop",
            QueryKind::Php => "php",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rwr" => Ok(QueryKind::Rwr),
            "hop" | "hops" => Ok(QueryKind::Hop),
            "php" => Ok(QueryKind::Php),
            other => Err(Error::InvalidParameter(format!("unknown query type {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerVector {
    pub kind: QueryKind,
    pub query: NodeId,
    pub values: Vec<f64>,
    /// False when an iterative query hit its iteration cap.
    pub converged: bool,
    pub iterations: usize,
}

/// Iteration settings for RWR and PHP. `decay` is the walk probability for
/// RWR and `c` for PHP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterParams {
    pub decay: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for IterParams {
    fn default() -> Self {
        IterParams {
            decay: 0.95,
            tol: 1e-9,
            max_iters: 1000,
        }
    }
}

impl IterParams {
    fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidParameter(format!("decay must lie in (0, 1), got {}", self.decay)));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter("tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// Hop distances from `q`. Unreachable nodes get the largest finite distance.
pub fn hop_query(topo: &impl Topology, q: NodeId) -> Result<AnswerVector> {
    topo.check_node(q)?;
    let dist = topo.hop_distances(q);
    let max = dist.iter().flatten().copied().max().unwrap_or(0);
    Ok(AnswerVector {
        kind: QueryKind::Hop,
        query: q,
        values: dist.iter().map(|d| d.unwrap_or(max) as f64).collect(),
        converged: true,
        iterations: 0,
    })
}

/// Random walk with restart by power iteration from the uniform vector.
/// Degree-0 nodes send their walk mass back to `q`.
pub fn rwr_query(topo: &impl Topology, q: NodeId, params: IterParams) -> Result<AnswerVector> {
    topo.check_node(q)?;
    params.validate()?;
    let n = topo.node_count();
    let p = params.decay;
    let deg: Vec<f64> = (0..n as NodeId).map(|u| topo.degree(u) as f64).collect();
    let mut r = vec![1.0 / n as f64; n];
    let mut scaled = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        let mut dangling = 0.0;
        for u in 0..n {
            if deg[u] > 0.0 {
                scaled[u] = r[u] / deg[u];
            } else {
                scaled[u] = 0.0;
                dangling += r[u];
            }
        }
        topo.adj_mul(&scaled, &mut next);
        for x in next.iter_mut() {
            *x *= p;
        }
        next[q as usize] += p * dangling + (1.0 - p);
        let change: f64 = r.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut r, &mut next);
        if change < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("rwr from {q} did not converge in {} iterations", params.max_iters);
    }
    Ok(AnswerVector {
        kind: QueryKind::Rwr,
        query: q,
        values: r,
        converged,
        iterations,
    })
}

/// Penalized hitting probability: `PHP_q = 1`, otherwise `c` times the mean
/// over neighbours, by Jacobi iteration from the indicator of `q`.
pub fn php_query(topo: &impl Topology, q: NodeId, params: IterParams) -> Result<AnswerVector> {
    topo.check_node(q)?;
    params.validate()?;
    let n = topo.node_count();
    let c = params.decay;
    let deg: Vec<f64> = (0..n as NodeId).map(|u| topo.degree(u) as f64).collect();
    let mut x = vec![0.0; n];
    x[q as usize] = 1.0;
    let mut sums = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        topo.adj_mul(&x, &mut sums);
        let mut change = 0.0f64;
        for u in 0..n {
            let v = if u == q as usize {
                1.0
            } else if deg[u] > 0.0 {
                c * sums[u] / deg[u]
            } else {
                0.0
            };
            change = change.max((v - x[u]).abs());
            x[u] = v;
        }
        if change < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("php from {q} did not converge in {} iterations", params.max_iters);
    }
    Ok(AnswerVector {
        kind: QueryKind::Php,
        query: q,
        values: x,
        converged,
        iterations,
    })
}

/// Dispatches on `kind` with default iteration settings.
pub fn answer(topo: &impl Topology, kind: QueryKind, q: NodeId) -> Result<AnswerVector> {
    match kind {
        QueryKind::Hop => hop_query(topo, q),
        QueryKind::Rwr => rwr_query(topo, q, IterParams::default()),
        QueryKind::Php => php_query(topo, q, IterParams::default()),
    }
}
