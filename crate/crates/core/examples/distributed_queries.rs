//! Splits a two-community graph over two machines and routes queries to
//! the machine that owns each query node.
//!
//! Run with `cargo run --release --example distributed_queries`.

use pegasus::distributed::{build_deployment_subgraphs, build_deployment_summaries, partition, PartitionMethod};
use pegasus::engine::EngineConfig;
use pegasus::graph::generate_two_community;
use pegasus::query::QueryKind;

fn main() -> pegasus::Result<()> {
    let g = generate_two_community(500, 3, 20, 5)?;
    let parts = partition(&g, 2, PartitionMethod::LabelPropagation, 0)?;
    println!("parts: {} + {} nodes", parts[0].len(), parts[1].len());

    let k = 0.5 * g.size_bits();
    let summaries = build_deployment_summaries(&g, &parts, k, &EngineConfig::with_budget(k))?;
    let subgraphs = build_deployment_subgraphs(&g, &parts, k)?;

    let queries: Vec<u32> = (0..g.node_count() as u32).step_by(50).collect();
    for (name, dep) in [("summary", &summaries), ("subgraph", &subgraphs)] {
        let routed = dep.answer_multi(&queries.iter().map(|&q| (q, QueryKind::Rwr)).collect::<Vec<_>>())?;
        assert!(routed.iter().all(|r| r.accessed.len() == 1));
        let reports = dep.evaluate(&g, &queries, &[QueryKind::Rwr])?;
        let sizes: Vec<String> = dep.machines().iter().map(|m| format!("{:.0}", m.payload().size_bits())).collect();
        println!(
            "{name}: machine bits [{}] of {k:.0}, RWR SMAPE {:.4}",
            sizes.join(", "),
            reports[0].smape_mean
        );
    }
    Ok(())
}
