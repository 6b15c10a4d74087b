//! Hop distances to the target set and the separable pair weights
//! `W(u, v) = w_u w_v / z` with `w_u = alpha^(-D(u, T))`.

use std::io::BufRead;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Graph, NodeId, Result};

/// Non-empty, deduplicated, sorted set of target nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    nodes: Vec<NodeId>,
}

impl TargetSet {
    pub fn new(mut nodes: Vec<NodeId>, node_count: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("target set is empty".into()));
        }
        nodes.sort_unstable();
        nodes.dedup();
        if let Some(&bad) = nodes.iter().find(|&&u| u as usize >= node_count) {
            return Err(Error::InvalidNode {
                node: bad as u64,
                node_count,
            });
        }
        Ok(TargetSet { nodes })
    }

    /// `T = V`.
    pub fn all(node_count: usize) -> Result<Self> {
        Self::new((0..node_count as NodeId).collect(), node_count)
    }

    /// Uniform sample of `count` distinct nodes.
    pub fn sample(node_count: usize, count: usize, seed: u64) -> Result<Self> {
        if count == 0 || count > node_count {
            return Err(Error::InvalidParameter(format!(
                "cannot sample {count} targets from {node_count} nodes"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = index::sample(&mut rng, node_count, count)
            .into_iter()
            .map(|u| u as NodeId)
            .collect();
        Self::new(picked, node_count)
    }

    /// One node id per line; `#` comments and blank lines ignored.
    pub fn read(reader: impl BufRead, node_count: usize) -> Result<Self> {
        let mut nodes = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let id: u64 = line.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("invalid node id {line:?}"),
            })?;
            if id >= node_count as u64 {
                return Err(Error::InvalidNode { node: id, node_count });
            }
            nodes.push(id as NodeId);
        }
        Self::new(nodes, node_count)
    }

    pub fn load(path: impl AsRef<Path>, node_count: usize) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file), node_count)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.nodes.binary_search(&u).is_ok()
    }
}

/// Per-node personalization factors and the normalizer that makes the mean
/// pair weight over unordered distinct pairs equal to one.
#[derive(Debug, Clone)]
pub struct WeightModel {
    distance: Vec<Option<u32>>,
    factor: Vec<f64>,
    z: f64,
    alpha: f64,
}

impl WeightModel {
    pub fn build(graph: &Graph, targets: &TargetSet, alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
        }
        if targets.is_empty() {
            return Err(Error::InvalidParameter("target set is empty".into()));
        }
        if let Some(&bad) = targets.nodes().last() {
            if bad as usize >= graph.node_count() {
                return Err(Error::InvalidNode {
                    node: bad as u64,
                    node_count: graph.node_count(),
                });
            }
        }
        let distance = graph.bfs_distances(targets.nodes());
        let unreachable = distance.iter().filter(|d| d.is_none()).count();
        if unreachable > 0 {
            log::warn!("{unreachable} nodes cannot reach the target set; their weight is 0");
        }
        let factor: Vec<f64> = distance
            .iter()
            .map(|d| match d {
                Some(h) => alpha.powi(-(*h as i32)),
                None => 0.0,
            })
            .collect();
        let n = graph.node_count() as f64;
        let sum = compensated_sum(factor.iter().copied());
        let sum_sq = compensated_sum(factor.iter().map(|w| w * w));
        let mut z = if n >= 2.0 {
            (sum * sum - sum_sq) / (n * (n - 1.0))
        } else {
            1.0
        };
        if !(z > 0.0) {
            log::warn!("every pair weight is zero; using z = 1");
            z = 1.0;
        }
        Ok(WeightModel {
            distance,
            factor,
            z,
            alpha,
        })
    }

    /// The non-personalized model: every pair weight is 1.
    pub fn uniform(node_count: usize) -> Self {
        WeightModel {
            distance: vec![Some(0); node_count],
            factor: vec![1.0; node_count],
            z: 1.0,
            alpha: 1.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.factor.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Hop distance to the nearest target, `None` when unreachable.
    pub fn distance(&self, u: NodeId) -> Option<u32> {
        self.distance[u as usize]
    }

    pub fn factor(&self, u: NodeId) -> f64 {
        self.factor[u as usize]
    }

    pub fn factors(&self) -> &[f64] {
        &self.factor
    }

    pub fn pair_weight(&self, u: NodeId, v: NodeId) -> Result<f64> {
        if u == v {
            return Err(Error::SelfPair(u));
        }
        for x in [u, v] {
            if x as usize >= self.node_count() {
                return Err(Error::InvalidNode {
                    node: x as u64,
                    node_count: self.node_count(),
                });
            }
        }
        Ok(self.weight(u, v))
    }

    /// Unchecked `w_u w_v / z`.
    #[inline]
    pub(crate) fn weight(&self, u: NodeId, v: NodeId) -> f64 {
        self.factor[u as usize] * self.factor[v as usize] / self.z
    }
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
