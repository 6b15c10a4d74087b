//! Per-machine payloads, query routing and the deployment manifest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PartitionMethod;
use crate::engine::{summarize, EngineConfig};
use crate::eval::experiment::{aggregate, ground_truth, score, QueryScore};
use crate::eval::MetricReport;
use crate::query::{answer, AnswerVector, QueryKind, SummaryTopology};
use crate::summary::{log2, read_pgs, write_pgs};
use crate::{Error, Graph, NodeId, Result, SummaryGraph, TargetSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeploymentKind {
    Summary,
    Subgraph,
}

impl std::fmt::Display for DeploymentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeploymentKind::Summary => "summary",
            DeploymentKind::Subgraph => "subgraph",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Summary(SummaryGraph),
    /// Retained edges over the full node id space.
    Subgraph(Graph),
}

impl Payload {
    /// Summary size bits for summaries; `2 |E_i| log2 |V|` for subgraphs.
    pub fn size_bits(&self) -> f64 {
        match self {
            Payload::Summary(s) => s.size_bits(),
            Payload::Subgraph(g) => 2.0 * g.edge_count() as f64 * log2(g.node_count()),
        }
    }
}

/// One simulated machine. Every read of its payload is counted.
#[derive(Debug)]
pub struct Machine {
    payload: Payload,
    reads: AtomicUsize,
}

impl Machine {
    fn new(payload: Payload) -> Self {
        Machine {
            payload,
            reads: AtomicUsize::new(0),
        }
    }

    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::Relaxed)
    }

    /// The stored payload, for inspection. Not counted as a read.
    pub fn payload(&self) -> &Payload {
        &self.payload
    }
}

#[derive(Debug)]
pub struct Deployment {
    pub kind: DeploymentKind,
    pub k_bits: f64,
    /// Machine index of every node.
    pub routing: Vec<u32>,
    machines: Vec<Machine>,
}

/// Answer to one routed query. `answer` is `None` when the machine's
/// payload does not contain the query node.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedAnswer {
    pub query: NodeId,
    pub kind: QueryKind,
    pub machine: u32,
    /// Machines whose payload was read while answering.
    pub accessed: Vec<u32>,
    pub answer: Option<AnswerVector>,
}

impl Deployment {
    pub fn new(kind: DeploymentKind, k_bits: f64, routing: Vec<u32>, payloads: Vec<Payload>) -> Result<Self> {
        let m = payloads.len();
        if let Some(&bad) = routing.iter().find(|&&r| r as usize >= m) {
            return Err(Error::InvalidParameter(format!("routing names machine {bad} of {m}")));
        }
        for (i, p) in payloads.iter().enumerate() {
            let n = match p {
                Payload::Summary(s) => s.node_count(),
                Payload::Subgraph(g) => g.node_count(),
            };
            if n != routing.len() {
                return Err(Error::Machine {
                    machine: i,
                    source: Box::new(Error::LengthMismatch(routing.len(), n)),
                });
            }
        }
        Ok(Deployment {
            kind,
            k_bits,
            routing,
            machines: payloads.into_iter().map(Machine::new).collect(),
        })
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    fn read(&self, machine: u32, log: &mut Vec<u32>) -> &Payload {
        let m = &self.machines[machine as usize];
        m.reads.fetch_add(1, Ordering::Relaxed);
        log.push(machine);
        &m.payload
    }

    /// Answers every query on the payload of the machine its node routes to
    /// and nothing else.
    pub fn answer_multi(&self, queries: &[(NodeId, QueryKind)]) -> Result<Vec<RoutedAnswer>> {
        let n = self.routing.len();
        for &(q, _) in queries {
            if q as usize >= n {
                return Err(Error::InvalidNode {
                    node: q as u64,
                    node_count: n,
                });
            }
        }
        queries
            .par_iter()
            .map(|&(q, kind)| {
                let machine = self.routing[q as usize];
                let mut accessed = Vec::with_capacity(1);
                let answer = match self.read(machine, &mut accessed) {
                    Payload::Summary(s) => Some(answer(&SummaryTopology::new(s), kind, q)?),
                    Payload::Subgraph(g) if g.degree(q) == 0 => None,
                    Payload::Subgraph(g) => Some(answer(g, kind, q)?),
                };
                Ok(RoutedAnswer {
                    query: q,
                    kind,
                    machine,
                    accessed,
                    answer,
                })
            })
            .collect()
    }

    /// Scores routed answers against exact answers on `graph`. Unanswerable
    /// queries count as worst case: every SMAPE term 1 and Spearman -1.
    pub fn evaluate(&self, graph: &Graph, queries: &[NodeId], kinds: &[QueryKind]) -> Result<Vec<MetricReport>> {
        let n = graph.node_count() as f64;
        let rate = self.k_bits / graph.size_bits();
        let mut reports = Vec::new();
        for &kind in kinds {
            let truth = ground_truth(graph, kind, queries);
            let routed: Vec<(NodeId, QueryKind)> = queries.iter().map(|&q| (q, kind)).collect();
            let answers = self.answer_multi(&routed)?;
            let scores: Vec<Option<QueryScore>> = answers
                .iter()
                .zip(&truth)
                .map(|(a, t)| {
                    let t = t.as_ref().ok()?;
                    match &a.answer {
                        Some(ans) => score(t, ans).ok(),
                        None => Some(QueryScore {
                            smape_sum: n,
                            smape_mean: 1.0,
                            spearman: Some(-1.0),
                        }),
                    }
                })
                .collect();
            reports.push(aggregate(&self.kind.to_string(), kind, rate, &scores));
        }
        Ok(reports)
    }
}

/// One summary per part, personalized to that part, each within `k_bits`.
/// Machine `i` runs with seed `config.seed + i`.
pub fn build_deployment_summaries(
    graph: &Graph,
    parts: &[Vec<NodeId>],
    k_bits: f64,
    config: &EngineConfig,
) -> Result<Deployment> {
    let n = graph.node_count();
    let routing = routing_table(parts, n)?;
    let payloads: Vec<Result<Payload>> = parts
        .par_iter()
        .enumerate()
        .map(|(i, part)| {
            let wrap = |e| Error::Machine {
                machine: i,
                source: Box::new(e),
            };
            let targets = TargetSet::new(part.clone(), n).map_err(wrap)?;
            let cfg = EngineConfig {
                budget_bits: k_bits,
                seed: config.seed.wrapping_add(i as u64),
                ..config.clone()
            };
            let out = summarize(graph, &targets, &cfg).map_err(wrap)?;
            Ok(Payload::Summary(out.summary))
        })
        .collect();
    let payloads = payloads.into_iter().collect::<Result<Vec<_>>>()?;
    Deployment::new(DeploymentKind::Summary, k_bits, routing, payloads)
}

/// For each part, the edges nearest to it: edges ordered by the BFS distance
/// of their nearer endpoint from the part, then lexicographically, cut at
/// `floor(k / (2 log2 |V|))` edges.
pub fn build_deployment_subgraphs(graph: &Graph, parts: &[Vec<NodeId>], k_bits: f64) -> Result<Deployment> {
    let n = graph.node_count();
    let routing = routing_table(parts, n)?;
    let edge_bits = 2.0 * log2(n);
    if !(k_bits >= edge_bits) || edge_bits == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "budget {k_bits} bits cannot hold a single edge ({edge_bits} bits)"
        )));
    }
    let keep = ((k_bits / edge_bits).floor() as usize).min(graph.edge_count());
    let edges: Vec<(NodeId, NodeId)> = graph.edges().collect();
    let payloads: Vec<Result<Payload>> = parts
        .par_iter()
        .map(|part| {
            let dist = graph.bfs_distances(part);
            let mut ranked: Vec<(u32, NodeId, NodeId)> = edges
                .iter()
                .filter_map(|&(u, v)| {
                    let d = match (dist[u as usize], dist[v as usize]) {
                        (Some(a), Some(b)) => a.min(b),
                        (Some(a), None) | (None, Some(a)) => a,
                        (None, None) => return None,
                    };
                    Some((d, u, v))
                })
                .collect();
            if keep < ranked.len() {
                ranked.select_nth_unstable(keep);
                ranked.truncate(keep);
            }
            Ok(Payload::Subgraph(Graph::from_edges(n, ranked.into_iter().map(|(_, u, v)| (u, v)))?))
        })
        .collect();
    let payloads = payloads.into_iter().collect::<Result<Vec<_>>>()?;
    Deployment::new(DeploymentKind::Subgraph, k_bits, routing, payloads)
}

fn routing_table(parts: &[Vec<NodeId>], n: usize) -> Result<Vec<u32>> {
    let mut routing = vec![u32::MAX; n];
    for (i, part) in parts.iter().enumerate() {
        for &u in part {
            if u as usize >= n {
                return Err(Error::InvalidNode {
                    node: u as u64,
                    node_count: n,
                });
            }
            if routing[u as usize] != u32::MAX {
                return Err(Error::InvalidParameter(format!("node {u} appears in two parts")));
            }
            routing[u as usize] = i as u32;
        }
    }
    if let Some(u) = routing.iter().position(|&r| r == u32::MAX) {
        return Err(Error::InvalidParameter(format!("node {u} is not covered by any part")));
    }
    Ok(routing)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub m: usize,
    pub k_bits: f64,
    pub method: PartitionMethod,
    pub seed: u64,
    pub deployment: DeploymentKind,
    pub node_count: usize,
    /// Paths relative to the manifest's directory.
    pub payloads: Vec<PathBuf>,
    pub routing: PathBuf,
}

/// Writes payload files, a `node<TAB>machine` routing file and
/// `manifest.json` into `dir`.
pub fn write_deployment(dep: &Deployment, dir: &Path, method: PartitionMethod, seed: u64) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut payloads = Vec::new();
    for (i, machine) in dep.machines.iter().enumerate() {
        let (name, write): (String, Box<dyn Fn(&mut dyn Write) -> std::io::Result<()>>) = match &machine.payload {
            Payload::Summary(s) => (format!("machine_{i}.pgs"), Box::new(move |w| write_pgs(s, w))),
            Payload::Subgraph(g) => (format!("machine_{i}.tsv"), Box::new(move |w| write_subgraph(g, w))),
        };
        let path = dir.join(&name);
        let mut out = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
        write(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(&path, e))?;
        payloads.push(PathBuf::from(name));
    }
    let routing = PathBuf::from("routing.tsv");
    let path = dir.join(&routing);
    let mut out = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    for (u, r) in dep.routing.iter().enumerate() {
        writeln!(out, "{u}\t{r}").map_err(|e| Error::io(&path, e))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;

    let manifest = Manifest {
        m: dep.machine_count(),
        k_bits: dep.k_bits,
        method,
        seed,
        deployment: dep.kind,
        node_count: dep.routing.len(),
        payloads,
        routing,
    };
    let path = dir.join("manifest.json");
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(manifest)
}

/// Loads a deployment written by [`write_deployment`].
pub fn read_deployment(manifest_path: &Path) -> Result<(Manifest, Deployment)> {
    let file = File::open(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_reader(BufReader::new(file))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let open = |p: &Path| -> Result<BufReader<File>> {
        let path = dir.join(p);
        Ok(BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?))
    };
    let mut payloads = Vec::new();
    for p in &manifest.payloads {
        payloads.push(match manifest.deployment {
            DeploymentKind::Summary => Payload::Summary(read_pgs(open(p)?)?),
            DeploymentKind::Subgraph => Payload::Subgraph(read_subgraph(open(p)?, manifest.node_count)?),
        });
    }
    let mut routing = vec![u32::MAX; manifest.node_count];
    for (i, line) in open(&manifest.routing)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(dir.join(&manifest.routing), e))?;
        let parse = || -> Option<(usize, u32)> {
            let mut it = line.split_whitespace();
            let u = it.next()?.parse().ok()?;
            let r = it.next()?.parse().ok()?;
            Some((u, r))
        };
        match parse() {
            Some((u, r)) if u < routing.len() => routing[u] = r,
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("bad routing row {line:?}"),
                })
            }
        }
    }
    let dep = Deployment::new(manifest.deployment, manifest.k_bits, routing, payloads)?;
    Ok((manifest, dep))
}

fn write_subgraph(g: &Graph, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "# nodes {}", g.node_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u}\t{v}")?;
    }
    Ok(())
}

fn read_subgraph(reader: impl BufRead, n: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<subgraph>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(u), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected two node ids".into(),
            });
        };
        let bad = |_| Error::Parse {
            line: i + 1,
            message: format!("bad node id in {line:?}"),
        };
        edges.push((u.parse::<NodeId>().map_err(bad)?, v.parse::<NodeId>().map_err(bad)?));
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributed::partition;
    use crate::graph::generate_ba;

    #[test]
    fn single_machine_matches_single_summary() {
        let g = generate_ba(200, 2, 1).unwrap();
        let parts = vec![(0..200).collect::<Vec<_>>()];
        let cfg = EngineConfig {
            seed: 4,
            ..EngineConfig::with_budget(0.5 * g.size_bits())
        };
        let dep = build_deployment_summaries(&g, &parts, cfg.budget_bits, &cfg).unwrap();
        let single = summarize(&g, &TargetSet::all(200).unwrap(), &cfg).unwrap().summary;
        let Payload::Summary(s) = &dep.machines()[0].payload else { panic!() };
        assert_eq!(s, &single);
        let got = dep.answer_multi(&[(7, QueryKind::Rwr)]).unwrap();
        let want = answer(&SummaryTopology::new(&single), QueryKind::Rwr, 7).unwrap();
        assert_eq!(got[0].answer.as_ref().unwrap().values, want.values);
    }

    #[test]
    fn initial_payload_is_exact() {
        let g = generate_ba(60, 2, 2).unwrap();
        let dep = Deployment::new(
            DeploymentKind::Summary,
            f64::INFINITY,
            vec![0; 60],
            vec![Payload::Summary(SummaryGraph::initial(&g))],
        )
        .unwrap();
        for kind in QueryKind::ALL {
            let a = dep.answer_multi(&[(3, kind)]).unwrap();
            let t = answer(&g, kind, 3).unwrap();
            let diff = a[0].answer.as_ref().unwrap().values.iter().zip(&t.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-9);
        }
    }

    #[test]
    fn subgraph_budgets() {
        let g = generate_ba(100, 3, 3).unwrap();
        let parts = partition(&g, 2, PartitionMethod::LabelPropagation, 0).unwrap();
        let dep = build_deployment_subgraphs(&g, &parts, g.size_bits()).unwrap();
        for m in dep.machines() {
            assert_eq!(m.payload.size_bits(), g.size_bits());
        }
        let one = vec![(0..100).collect::<Vec<_>>()];
        let dep = build_deployment_subgraphs(&g, &one, g.size_bits() / 2.0).unwrap();
        let Payload::Subgraph(h) = &dep.machines()[0].payload else { panic!() };
        assert_eq!(h.edge_count(), g.edge_count() / 2);
        assert!(build_deployment_subgraphs(&g, &one, 1.0).is_err());
    }

    #[test]
    fn star_keeps_hub_edges() {
        let edges: Vec<(u32, u32)> = (1..40).map(|v| (0, v)).chain((1..39).map(|v| (v, v + 1))).collect();
        let g = Graph::from_edges(40, edges).unwrap();
        let parts = vec![vec![0], (1..40).collect()];
        let dep = build_deployment_subgraphs(&g, &parts, 10.0 * 2.0 * 40f64.log2()).unwrap();
        let Payload::Subgraph(h) = &dep.machines()[0].payload else { panic!() };
        assert_eq!(h.edge_count(), 10);
        assert!(h.edges().all(|(u, _)| u == 0));
    }

    #[test]
    fn routing_and_access_audit() {
        let g = generate_ba(300, 2, 5).unwrap();
        let parts = partition(&g, 3, PartitionMethod::LabelPropagation, 1).unwrap();
        let k = 0.5 * g.size_bits();
        let dep = build_deployment_summaries(&g, &parts, k, &EngineConfig::default()).unwrap();
        for m in dep.machines() {
            assert!(m.payload.size_bits() <= k);
        }
        let queries: Vec<(NodeId, QueryKind)> = (0..300).step_by(7).map(|q| (q, QueryKind::Hop)).collect();
        let answers = dep.answer_multi(&queries).unwrap();
        for a in &answers {
            assert_eq!(a.accessed, vec![a.machine]);
            assert!(parts[a.machine as usize].contains(&a.query));
        }
        let total: usize = dep.machines().iter().map(|m| m.reads()).sum();
        assert_eq!(total, queries.len());
    }

    #[test]
    fn unanswerable_scores_worst_case() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let dep = Deployment::new(
            DeploymentKind::Subgraph,
            4.0,
            vec![0; 4],
            vec![Payload::Subgraph(Graph::from_edges(4, [(0, 1)]).unwrap())],
        )
        .unwrap();
        let r = &dep.evaluate(&g, &[3], &[QueryKind::Rwr]).unwrap()[0];
        assert_eq!((r.smape_sum, r.smape_mean, r.spearman), (4.0, 1.0, -1.0));
    }

    #[test]
    fn manifest_roundtrip() {
        let g = generate_ba(80, 2, 6).unwrap();
        let parts = partition(&g, 2, PartitionMethod::Louvain, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for dep in [
            build_deployment_summaries(&g, &parts, 0.6 * g.size_bits(), &EngineConfig::default()).unwrap(),
            build_deployment_subgraphs(&g, &parts, 0.6 * g.size_bits()).unwrap(),
        ] {
            let sub = dir.path().join(dep.kind.to_string());
            write_deployment(&dep, &sub, PartitionMethod::Louvain, 2).unwrap();
            let (manifest, back) = read_deployment(&sub.join("manifest.json")).unwrap();
            assert_eq!(manifest.m, 2);
            assert_eq!(back.routing, dep.routing);
            for (a, b) in back.machines().iter().zip(dep.machines()) {
                match (&a.payload, &b.payload) {
                    (Payload::Summary(x), Payload::Summary(y)) => assert_eq!(x, &y.canonical()),
                    (x, y) => assert_eq!(x, y),
                }
            }
        }
    }
}
