//! Answers RWR and HOP queries on a summary and compares them to exact answers.
//!
//! Run with `cargo run --release --example query_on_summary`.

use pegasus::engine::{summarize, EngineConfig};
use pegasus::eval::{smape, spearman};
use pegasus::graph::generate_ws;
use pegasus::query::{answer, top_k, QueryKind, SummaryTopology};
use pegasus::TargetSet;

fn main() -> pegasus::Result<()> {
    let g = generate_ws(1000, 6, 0.05, 3)?;
    let q = 17;
    let targets = TargetSet::new(vec![q], g.node_count())?;
    let cfg = EngineConfig {
        alpha: 1.5,
        ..EngineConfig::with_budget_ratio(&g, 0.4)?
    };
    let out = summarize(&g, &targets, &cfg)?;
    let topo = SummaryTopology::new(&out.summary);

    for kind in [QueryKind::Rwr, QueryKind::Hop] {
        let exact = answer(&g, kind, q)?;
        let approx = answer(&topo, kind, q)?;
        let (_, mean) = smape(&exact.values, &approx.values)?;
        let rho = spearman(&exact.values, &approx.values)?;
        println!("{}: SMAPE {mean:.4}, Spearman {rho:.4}", kind.as_str());
    }
    println!("top RWR nodes on the summary: {:?}", top_k(&answer(&topo, QueryKind::Rwr, q)?, 5));
    Ok(())
}
