//! JSON-described distributed experiments.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{build_deployment_subgraphs, build_deployment_summaries, partition, write_deployment};
use super::{DeploymentKind, PartitionMethod};
use crate::engine::EngineConfig;
use crate::eval::ResultRow;
use crate::graph::{generate_ba, generate_two_community, generate_ws, load_edge_list};
use crate::query::QueryKind;
use crate::{Error, Graph, Result, TargetSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphSource {
    /// Edge list, relative paths resolved against the scenario file.
    File { path: PathBuf },
    Ba { n: usize, m: usize, seed: u64 },
    Ws { n: usize, k: usize, p: f64, seed: u64 },
    TwoCommunity { n_each: usize, m: usize, bridges: usize, seed: u64 },
}

impl GraphSource {
    pub fn load(&self, base: &Path) -> Result<Graph> {
        match self {
            GraphSource::File { path } => Ok(load_edge_list(base.join(path), true)?.graph),
            &GraphSource::Ba { n, m, seed } => generate_ba(n, m, seed),
            &GraphSource::Ws { n, k, p, seed } => generate_ws(n, k, p, seed),
            &GraphSource::TwoCommunity {
                n_each,
                m,
                bridges,
                seed,
            } => generate_two_community(n_each, m, bridges, seed),
        }
    }
}

fn default_ratio() -> f64 {
    0.5
}

fn default_queries() -> usize {
    100
}

fn default_kinds() -> Vec<QueryKind> {
    vec![QueryKind::Rwr]
}

fn default_deployments() -> Vec<DeploymentKind> {
    vec![DeploymentKind::Summary, DeploymentKind::Subgraph]
}

fn default_method() -> PartitionMethod {
    PartitionMethod::LabelPropagation
}

/// A distributed experiment: for every seed, partition, build each
/// deployment at `k = budget_ratio * Size(G)` bits per machine, and score
/// `query_count` random queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub dataset: String,
    pub graph: GraphSource,
    pub machines: usize,
    #[serde(default = "default_ratio")]
    pub budget_ratio: f64,
    #[serde(default = "default_method")]
    pub method: PartitionMethod,
    pub seeds: Vec<u64>,
    #[serde(default = "default_queries")]
    pub query_count: usize,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<QueryKind>,
    #[serde(default = "default_deployments")]
    pub deployments: Vec<DeploymentKind>,
    /// Engine settings for summary payloads; budget and seed are overridden.
    #[serde(default)]
    pub engine: EngineConfig,
    /// When set, each deployment is written to
    /// `<output_dir>/seed_<s>/<kind>/manifest.json`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Runs `scenario` on `graph`, returning one row per (seed, deployment,
/// kind) tagged with the deployment type.
pub fn run_scenario(scenario: &Scenario, graph: &Graph) -> Result<Vec<ResultRow>> {
    if !(scenario.budget_ratio > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "budget ratio must be positive, got {}",
            scenario.budget_ratio
        )));
    }
    let k = scenario.budget_ratio * graph.size_bits();
    let mut rows = Vec::new();
    for &seed in &scenario.seeds {
        let parts = partition(graph, scenario.machines, scenario.method, seed)?;
        let queries = TargetSet::sample(graph.node_count(), scenario.query_count.min(graph.node_count()), seed)?;
        for &kind in &scenario.deployments {
            let start = std::time::Instant::now();
            let engine = EngineConfig {
                seed,
                ..scenario.engine.clone()
            };
            let dep = match kind {
                DeploymentKind::Summary => build_deployment_summaries(graph, &parts, k, &engine)?,
                DeploymentKind::Subgraph => build_deployment_subgraphs(graph, &parts, k)?,
            };
            if let Some(dir) = &scenario.output_dir {
                write_deployment(&dep, &dir.join(format!("seed_{seed}")).join(kind.to_string()), scenario.method, seed)?;
            }
            let reports = dep.evaluate(graph, queries.nodes(), &scenario.kinds)?;
            let wall_ms = start.elapsed().as_millis() as u64;
            rows.extend(reports.into_iter().map(|r| ResultRow {
                dataset: scenario.dataset.clone(),
                seed,
                alpha: engine.alpha,
                beta: engine.beta,
                budget_ratio: scenario.budget_ratio,
                kind: r.kind,
                smape_sum: r.smape_sum,
                smape_mean: r.smape_mean,
                spearman: r.spearman,
                compression_rate: r.compression_rate,
                wall_ms,
                deployment: Some(kind.to_string()),
            }));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_json() {
        let s: Scenario = serde_json::from_str(
            r#"{"graph": {"model": "two_community", "n_each": 50, "m": 2, "bridges": 3, "seed": 1},
                "machines": 2, "seeds": [1], "query_count": 5}"#,
        )
        .unwrap();
        assert_eq!(s.budget_ratio, 0.5);
        assert_eq!(s.kinds, vec![QueryKind::Rwr]);
        assert_eq!(s.method, PartitionMethod::LabelPropagation);
        let g = s.graph.load(Path::new(".")).unwrap();
        let rows = run_scenario(&s, &g).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].deployment.as_deref(), Some("summary"));
        assert_eq!(rows[1].deployment.as_deref(), Some("subgraph"));
    }
}
