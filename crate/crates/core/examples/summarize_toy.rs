//! Summarizes a 5-node toy graph and prints the cost accounting.
//!
//! Run with `cargo run --example summarize_toy`.

use pegasus::engine::{summarize, EngineConfig};
use pegasus::summary::{total_cost, write_pgs};
use pegasus::{Graph, TargetSet, WeightModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a,b both point at c,d; c,d both point at e.
    let g = Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)])?;
    println!("graph: {} nodes, {} edges, {:.4} bits", g.node_count(), g.edge_count(), g.size_bits());

    let targets = TargetSet::all(g.node_count())?;
    let config = EngineConfig {
        alpha: 1.0,
        ..EngineConfig::with_budget(g.size_bits())
    };
    let out = summarize(&g, &targets, &config)?;
    let s = &out.summary;

    let weights = WeightModel::uniform(g.node_count());
    println!(
        "summary: {} supernodes, {} superedges, {:.4} bits, total cost {:.4}",
        s.supernode_count(),
        s.superedge_count(),
        s.size_bits(),
        total_cost(&g, &weights, s)
    );
    for a in s.live_supernodes() {
        println!("  supernode {a}: {:?}", s.members(a));
    }
    println!("merges {}, iterations {}", out.report.merges, out.report.iterations_used);

    let mut bytes = Vec::new();
    write_pgs(&s.canonical(), &mut bytes)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}
