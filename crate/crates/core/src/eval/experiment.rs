use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compression_rate, relative_personalized_error, smape, spearman, RelativeError};
use crate::engine::{summarize, EngineConfig};
use crate::query::{answer, AnswerVector, QueryKind, SummaryTopology, Topology};
use crate::{Error, Graph, NodeId, Result, SummaryGraph, TargetSet};

/// Accuracy of one summary on one query kind, averaged over query nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub kind: QueryKind,
    pub smape_sum: f64,
    pub smape_mean: f64,
    pub spearman: f64,
    pub compression_rate: f64,
    pub query_count: usize,
    /// Queries whose answer could not be computed.
    pub failures: usize,
    /// Answered queries left out of the Spearman average because one of
    /// the vectors was constant.
    pub spearman_undefined: usize,
}

/// One JSON-lines result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub budget_ratio: f64,
    pub kind: QueryKind,
    pub smape_sum: f64,
    pub smape_mean: f64,
    pub spearman: f64,
    pub compression_rate: f64,
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deployment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalizationRow {
    pub dataset: String,
    pub seed: u64,
    pub alpha: f64,
    pub target_count: usize,
    /// Mean over target probes of the relative personalized error; `None`
    /// when no probe had a defined ratio.
    pub relative_error: Option<f64>,
    pub compression_rate: f64,
    pub wall_ms: u64,
}

/// Settings shared by the trend drivers. `engine` is a template: budget,
/// alpha and seed are filled in per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendConfig {
    pub dataset: String,
    pub budget_ratio: f64,
    pub seeds: Vec<u64>,
    pub engine: EngineConfig,
}

impl TrendConfig {
    pub fn new(dataset: impl Into<String>, budget_ratio: f64, seeds: Vec<u64>) -> Self {
        TrendConfig {
            dataset: dataset.into(),
            budget_ratio,
            seeds,
            engine: EngineConfig::default(),
        }
    }

    fn engine_for(&self, graph: &Graph, alpha: f64, seed: u64) -> EngineConfig {
        EngineConfig {
            budget_bits: self.budget_ratio * graph.size_bits(),
            alpha,
            seed,
            ..self.engine.clone()
        }
    }
}

pub(crate) struct QueryScore {
    pub smape_sum: f64,
    pub smape_mean: f64,
    pub spearman: Option<f64>,
}

pub(crate) fn score(truth: &AnswerVector, approx: &AnswerVector) -> Result<QueryScore> {
    let (smape_sum, smape_mean) = smape(&truth.values, &approx.values)?;
    let spearman = match spearman(&truth.values, &approx.values) {
        Ok(r) => Some(r),
        Err(Error::UndefinedCorrelation) => None,
        Err(e) => return Err(e),
    };
    Ok(QueryScore {
        smape_sum,
        smape_mean,
        spearman,
    })
}

/// Averages per-query scores; `None` entries are failed queries.
pub(crate) fn aggregate(
    label: &str,
    kind: QueryKind,
    compression_rate: f64,
    scores: &[Option<QueryScore>],
) -> MetricReport {
    let ok: Vec<&QueryScore> = scores.iter().flatten().collect();
    let mean = |f: &dyn Fn(&QueryScore) -> f64| {
        if ok.is_empty() {
            0.0
        } else {
            ok.iter().map(|s| f(s)).sum::<f64>() / ok.len() as f64
        }
    };
    let rho: Vec<f64> = ok.iter().filter_map(|s| s.spearman).collect();
    MetricReport {
        label: label.to_string(),
        kind,
        smape_sum: mean(&|s| s.smape_sum),
        smape_mean: mean(&|s| s.smape_mean),
        spearman: if rho.is_empty() { 0.0 } else { rho.iter().sum::<f64>() / rho.len() as f64 },
        compression_rate,
        query_count: scores.len(),
        failures: scores.len() - ok.len(),
        spearman_undefined: ok.len() - rho.len(),
    }
}

pub(crate) fn ground_truth(graph: &Graph, kind: QueryKind, queries: &[NodeId]) -> Vec<Result<AnswerVector>> {
    queries.par_iter().map(|&q| answer(graph, kind, q)).collect()
}

/// Exact answers on `graph` against answers on each summary, one report per
/// `(summary, kind)` in input order.
pub fn run_query_accuracy_experiment(
    graph: &Graph,
    summaries: &[(&str, &SummaryGraph)],
    queries: &[NodeId],
    kinds: &[QueryKind],
) -> Result<Vec<MetricReport>> {
    for &q in queries {
        graph.check_node(q)?;
    }
    let mut reports = Vec::new();
    for &kind in kinds {
        let truth = ground_truth(graph, kind, queries);
        for &(label, summary) in summaries {
            let rate = compression_rate(summary, graph)?;
            let view = SummaryTopology::new(summary);
            let scores: Vec<Option<QueryScore>> = queries
                .par_iter()
                .zip(&truth)
                .map(|(&q, t)| {
                    let t = t.as_ref().ok()?;
                    let a = answer(&view, kind, q).ok()?;
                    score(t, &a).ok()
                })
                .collect();
            let failures = scores.iter().filter(|s| s.is_none()).count();
            if failures > 0 {
                log::warn!("{failures} {kind} queries failed on {label}");
            }
            reports.push(aggregate(label, kind, rate, &scores));
        }
    }
    Ok(reports)
}

/// For each seed, samples `query_count` query nodes, summarizes with them as
/// targets under every `alpha`, and scores each summary on those queries.
pub fn query_accuracy_trend(
    graph: &Graph,
    config: &TrendConfig,
    query_count: usize,
    alphas: &[f64],
    kinds: &[QueryKind],
) -> Result<Vec<ResultRow>> {
    let runs: Vec<(u64, f64)> = config
        .seeds
        .iter()
        .flat_map(|&s| alphas.iter().map(move |&a| (s, a)))
        .collect();
    let rows: Vec<Result<Vec<ResultRow>>> = runs
        .par_iter()
        .map(|&(seed, alpha)| {
            let start = Instant::now();
            let queries = TargetSet::sample(graph.node_count(), query_count, seed)?;
            let engine = config.engine_for(graph, alpha, seed);
            let out = summarize(graph, &queries, &engine)?;
            let reports = run_query_accuracy_experiment(graph, &[("summary", &out.summary)], queries.nodes(), kinds)?;
            let wall_ms = start.elapsed().as_millis() as u64;
            Ok(reports
                .into_iter()
                .map(|r| ResultRow {
                    dataset: config.dataset.clone(),
                    seed,
                    alpha,
                    beta: engine.beta,
                    budget_ratio: config.budget_ratio,
                    kind: r.kind,
                    smape_sum: r.smape_sum,
                    smape_mean: r.smape_mean,
                    spearman: r.spearman,
                    compression_rate: r.compression_rate,
                    wall_ms,
                    deployment: None,
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// For each seed, samples `target_count` targets and measures, at every
/// target, the personalized error of the summary built for them relative to
/// a non-personalized summary (`T = V`) at the same budget and seed. Each
/// probe is measured with the alpha the summary was built with.
pub fn personalization_trend(
    graph: &Graph,
    config: &TrendConfig,
    target_count: usize,
    alphas: &[f64],
) -> Result<Vec<PersonalizationRow>> {
    let n = graph.node_count();
    let per_seed: Vec<Result<Vec<PersonalizationRow>>> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let targets = TargetSet::sample(n, target_count, seed)?;
            let baseline = summarize(graph, &TargetSet::all(n)?, &config.engine_for(graph, 1.0, seed))?.summary;
            alphas
                .par_iter()
                .map(|&alpha| {
                    let start = Instant::now();
                    let out = summarize(graph, &targets, &config.engine_for(graph, alpha, seed))?;
                    let mut ratios = Vec::new();
                    for &t in targets.nodes() {
                        if let RelativeError::Ratio(r) =
                            relative_personalized_error(graph, &out.summary, t, alpha, &baseline)?
                        {
                            ratios.push(r);
                        }
                    }
                    Ok(PersonalizationRow {
                        dataset: config.dataset.clone(),
                        seed,
                        alpha,
                        target_count,
                        relative_error: if ratios.is_empty() {
                            None
                        } else {
                            Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
                        },
                        compression_rate: compression_rate(&out.summary, graph)?,
                        wall_ms: start.elapsed().as_millis() as u64,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_seed {
        out.extend(r?);
    }
    Ok(out)
}

/// One JSON object per line.
pub fn write_jsonl<T: Serialize>(rows: &[T], mut out: impl Write) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    out.flush().map_err(|e| Error::io("<output>", e))
}

/// The result rows as CSV with a header line.
pub fn write_csv(rows: &[ResultRow], mut out: impl Write) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    writeln!(
        out,
        "dataset,seed,alpha,beta,budget_ratio,kind,smape_sum,smape_mean,spearman,compression_rate,wall_ms,deployment"
    )
    .map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.seed,
            r.alpha,
            r.beta,
            r.budget_ratio,
            r.kind,
            r.smape_sum,
            r.smape_mean,
            r.spearman,
            r.compression_rate,
            r.wall_ms,
            r.deployment.as_deref().unwrap_or("")
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}
