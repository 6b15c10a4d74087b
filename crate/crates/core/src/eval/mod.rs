//! Accuracy and size metrics, and the experiment drivers built on them.

pub(crate) mod experiment;

pub use experiment::{
    personalization_trend, query_accuracy_trend, run_query_accuracy_experiment, write_csv, write_jsonl,
    MetricReport, PersonalizationRow, ResultRow, TrendConfig,
};

use crate::summary::personalized_error;
use crate::{Error, Graph, NodeId, Result, SummaryGraph, TargetSet, WeightModel};

/// Largest graph [`relative_personalized_error`] accepts.
pub const RELATIVE_ERROR_LIMIT: usize = 50_000;

/// SMAPE between a ground truth and an approximation: the raw sum of
/// `|x - y| / (|x| + |y|)` (0 when both are 0) and its mean.
pub fn smape(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = a.abs() + b.abs();
            if d == 0.0 {
                0.0
            } else {
                (a - b).abs() / d
            }
        })
        .sum();
    let mean = if x.is_empty() { 0.0 } else { sum / x.len() as f64 };
    Ok((sum, mean))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation);
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Summary bits over input-graph bits.
pub fn compression_rate(summary: &SummaryGraph, graph: &Graph) -> Result<f64> {
    if graph.edge_count() == 0 {
        return Err(Error::InvalidParameter("compression rate of a graph without edges".into()));
    }
    Ok(summary.size_bits() / graph.size_bits())
}

/// Size of a summary whose superedges carry integer weights up to
/// `max_weight`: `|P| (2 log2|S| + log2 w_max) + |V| log2|S|`.
pub fn weighted_summary_size_bits(supernodes: usize, superedges: usize, nodes: usize, max_weight: u64) -> f64 {
    let lg_s = if supernodes <= 1 { 0.0 } else { (supernodes as f64).log2() };
    let lg_w = (max_weight.max(1) as f64).log2();
    superedges as f64 * (2.0 * lg_s + lg_w) + nodes as f64 * lg_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeError {
    Ratio(f64),
    /// Both the summary and the baseline reconstruct the probe's pairs
    /// exactly.
    NotApplicable,
}

impl RelativeError {
    pub fn value(self) -> Option<f64> {
        match self {
            RelativeError::Ratio(r) => Some(r),
            RelativeError::NotApplicable => None,
        }
    }
}

/// Personalized error with `T = {probe}` of `summary`, divided by that of
/// `baseline`. A zero baseline gives `+inf` (or not-applicable when the
/// summary error is zero too).
pub fn relative_personalized_error(
    graph: &Graph,
    summary: &SummaryGraph,
    probe: NodeId,
    alpha: f64,
    baseline: &SummaryGraph,
) -> Result<RelativeError> {
    if graph.node_count() > RELATIVE_ERROR_LIMIT {
        return Err(Error::SizeGuard {
            what: "relative personalized error",
            size: graph.node_count(),
            limit: RELATIVE_ERROR_LIMIT,
        });
    }
    let weights = WeightModel::build(graph, &TargetSet::new(vec![probe], graph.node_count())?, alpha)?;
    let num = personalized_error(graph, &weights, summary);
    let den = personalized_error(graph, &weights, baseline);
    Ok(if den > 0.0 {
        RelativeError::Ratio(num / den)
    } else if num > 0.0 {
        RelativeError::Ratio(f64::INFINITY)
    } else {
        RelativeError::NotApplicable
    })
}

/// Median with the usual mean-of-middle rule for even lengths.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len();
    Some(if k % 2 == 1 {
        values[k / 2]
    } else {
        (values[k / 2 - 1] + values[k / 2]) / 2.0
    })
}
