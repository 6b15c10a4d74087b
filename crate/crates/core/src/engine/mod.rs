//! The summarization pipeline: candidate grouping by shingles, greedy
//! merging under an adaptive threshold, and a final sparsification pass.

mod merge;
mod shingle;
mod threshold;

use std::collections::HashMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use merge::{evaluate_merge, MergeEvaluation, MergeRecord};
pub use shingle::{generate_candidates, group_by_shingle, random_permutation, shingle};
pub use threshold::{update_threshold, ThresholdState};

use crate::summary::{personalized_error, size_bits, CostModel, PairStats, ProfileScratch};
use crate::{Error, Graph, Result, SummaryGraph, SupernodeId, TargetSet, WeightModel};

const HASH_STREAM: u64 = 1;
const PAIR_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub budget_bits: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub group_cap: usize,
    pub shingle_rounds: usize,
    pub theta_init: f64,
    /// Keep the merge sequence in the run report.
    pub audit: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            budget_bits: f64::INFINITY,
            alpha: 1.25,
            beta: 0.1,
            max_iterations: 20,
            seed: 0,
            group_cap: 500,
            shingle_rounds: 10,
            theta_init: 0.5,
            audit: false,
        }
    }
}

impl EngineConfig {
    pub fn with_budget(budget_bits: f64) -> Self {
        EngineConfig {
            budget_bits,
            ..Default::default()
        }
    }

    /// Budget as a fraction of the input graph's size in bits.
    pub fn with_budget_ratio(graph: &Graph, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::InvalidParameter(format!("budget ratio must be positive, got {ratio}")));
        }
        Ok(Self::with_budget(ratio * graph.size_bits()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.budget_bits > 0.0) {
            return bad(format!("budget must be positive, got {}", self.budget_bits));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if self.group_cap < 2 {
            return bad(format!("group_cap must be at least 2, got {}", self.group_cap));
        }
        if self.shingle_rounds == 0 {
            return bad("shingle_rounds must be positive".into());
        }
        if !self.theta_init.is_finite() {
            return bad("theta_init must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditLog {
    pub merges: Vec<MergeRecord>,
    /// `|L|` at the end of each iteration, before the threshold update.
    pub rejected_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub iterations_used: usize,
    pub final_size_bits: f64,
    pub budget_bits: f64,
    pub merges: usize,
    pub sparsified_superedges: usize,
    /// Threshold in force at the start of each iteration, then the final one.
    pub theta_trace: Vec<f64>,
    pub wall_ms: u64,
    pub config: EngineConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditLog>,
}

#[derive(Debug, Clone)]
pub struct Summarized {
    pub summary: SummaryGraph,
    pub report: RunReport,
}

/// Mutable summarization state: the summary plus the sums needed to price
/// merges without touching the whole graph.
pub struct Summarizer<'a> {
    graph: &'a Graph,
    weights: &'a WeightModel,
    summary: SummaryGraph,
    costs: CostModel<'a>,
    scratch: ProfileScratch,
    error_mass: f64,
    merges: usize,
    audit: Option<AuditLog>,
}

impl<'a> Summarizer<'a> {
    /// Starts from the summary with one supernode per node.
    pub fn new(graph: &'a Graph, weights: &'a WeightModel) -> Self {
        Self::from_summary(graph, weights, SummaryGraph::initial(graph)).expect("initial summary matches graph")
    }

    pub fn from_summary(graph: &'a Graph, weights: &'a WeightModel, summary: SummaryGraph) -> Result<Self> {
        let costs = CostModel::new(graph, weights, &summary)?;
        let error_mass = personalized_error(graph, weights, &summary);
        Ok(Summarizer {
            graph,
            weights,
            scratch: ProfileScratch::default(),
            summary,
            costs,
            error_mass,
            merges: 0,
            audit: None,
        })
    }

    pub fn with_audit(mut self) -> Self {
        self.audit = Some(AuditLog::default());
        self
    }

    pub fn summary(&self) -> &SummaryGraph {
        &self.summary
    }

    pub fn into_summary(self) -> SummaryGraph {
        self.summary
    }

    pub fn merges(&self) -> usize {
        self.merges
    }

    pub fn audit(&self) -> Option<&AuditLog> {
        self.audit.as_ref()
    }

    /// Personalized error maintained across merges and drops.
    pub fn error_mass(&self) -> f64 {
        self.error_mass
    }

    /// `Size + log2|V| * RE`, maintained incrementally.
    pub fn incremental_total_cost(&self) -> f64 {
        self.summary.size_bits() + crate::summary::error_unit_bits(self.summary.node_count()) * self.error_mass
    }

    /// Drops superedges, cheapest first, until the summary fits the budget.
    /// Returns the number dropped.
    pub fn sparsify(&mut self, budget_bits: f64) -> Result<usize> {
        let s = self.summary.supernode_count();
        let n = self.summary.node_count();
        if self.summary.size_bits() <= budget_bits {
            return Ok(0);
        }
        let residual = size_bits(s, 0, n);
        if residual > budget_bits {
            return Err(Error::BudgetInfeasible {
                budget_bits,
                residual_bits: residual,
            });
        }

        let mut present: HashMap<(SupernodeId, SupernodeId), (f64, usize)> = HashMap::new();
        for (u, v) in self.graph.edges() {
            let (a, b) = (self.summary.supernode_of(u), self.summary.supernode_of(v));
            let key = (a.min(b), a.max(b));
            if self.summary.has_superedge(key.0, key.1) {
                let e = present.entry(key).or_insert((0.0, 0));
                e.0 += self.weights.weight(u, v);
                e.1 += 1;
            }
        }
        let mut ranked: Vec<(f64, (SupernodeId, SupernodeId), PairStats)> = self
            .summary
            .superedges()
            .into_iter()
            .map(|(a, b)| {
                let (p, c) = present.get(&(a, b)).copied().unwrap_or((0.0, 0));
                let stats = PairStats {
                    present_mass: p,
                    total_mass: self.costs.pair_total(a, b),
                    edge_count: c,
                };
                (crate::summary::pair_cost(&stats, true, s, n), (a, b), stats)
            })
            .collect();
        ranked.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        let mut dropped = 0;
        for (_, (a, b), stats) in ranked {
            if self.summary.size_bits() <= budget_bits {
                break;
            }
            self.summary.remove_superedge(a, b);
            self.error_mass += stats.error(false) - stats.error(true);
            dropped += 1;
        }
        Ok(dropped)
    }

    /// The full loop: up to `max_iterations` rounds of grouping and merging
    /// while the summary exceeds the budget, then sparsification.
    pub fn run(&mut self, config: &EngineConfig) -> Result<RunReport> {
        config.validate()?;
        let start = Instant::now();
        let mut hash_rng = ChaCha8Rng::seed_from_u64(config.seed);
        hash_rng.set_stream(HASH_STREAM);
        let mut pair_rng = ChaCha8Rng::seed_from_u64(config.seed);
        pair_rng.set_stream(PAIR_STREAM);

        let mut threshold = ThresholdState::new(config.theta_init);
        let mut theta_trace = Vec::new();
        let mut iterations = 0;
        let merges_before = self.merges;
        while iterations < config.max_iterations && self.summary.size_bits() > config.budget_bits {
            theta_trace.push(threshold.theta);
            let groups = generate_candidates(
                &self.summary,
                self.graph,
                config.group_cap,
                config.shingle_rounds,
                &mut hash_rng,
            );
            for group in groups {
                self.merge_and_add(group, &mut threshold, &mut pair_rng);
            }
            if let Some(audit) = self.audit.as_mut() {
                audit.rejected_sizes.push(threshold.rejected().len());
            }
            log::debug!(
                "iteration {}: |S|={} size={:.1} theta={:.4} |L|={}",
                iterations + 1,
                self.summary.supernode_count(),
                self.summary.size_bits(),
                threshold.theta,
                threshold.rejected().len()
            );
            update_threshold(&mut threshold, config.beta);
            iterations += 1;
        }
        theta_trace.push(threshold.theta);
        let sparsified = self.sparsify(config.budget_bits)?;

        Ok(RunReport {
            iterations_used: iterations,
            final_size_bits: self.summary.size_bits(),
            budget_bits: config.budget_bits,
            merges: self.merges - merges_before,
            sparsified_superedges: sparsified,
            theta_trace,
            wall_ms: start.elapsed().as_millis() as u64,
            config: config.clone(),
            audit: self.audit.clone(),
        })
    }
}

/// Summarizes `graph` personalized to `targets` within `config.budget_bits`.
pub fn summarize(graph: &Graph, targets: &TargetSet, config: &EngineConfig) -> Result<Summarized> {
    config.validate()?;
    let weights = WeightModel::build(graph, targets, config.alpha)?;
    summarize_with_weights(graph, &weights, config)
}

/// Like [`summarize`] with a prebuilt weight model (`config.alpha` is not
/// consulted).
pub fn summarize_with_weights(graph: &Graph, weights: &WeightModel, config: &EngineConfig) -> Result<Summarized> {
    let mut engine = Summarizer::new(graph, weights);
    if config.audit {
        engine = engine.with_audit();
    }
    let report = engine.run(config)?;
    Ok(Summarized {
        summary: engine.into_summary(),
        report,
    })
}
