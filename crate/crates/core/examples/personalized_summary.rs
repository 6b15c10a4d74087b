//! Compares the error seen from one probe node as alpha grows.
//!
//! Run with `cargo run --release --example personalized_summary`.

use pegasus::engine::{summarize, EngineConfig};
use pegasus::eval::relative_personalized_error;
use pegasus::graph::generate_ba;
use pegasus::TargetSet;

fn main() -> pegasus::Result<()> {
    let g = generate_ba(2000, 3, 7)?;
    let probe = 42;
    let targets = TargetSet::new(vec![probe], g.node_count())?;
    let base = EngineConfig::with_budget_ratio(&g, 0.5)?;

    let plain = summarize(&g, &TargetSet::all(g.node_count())?, &EngineConfig { alpha: 1.0, ..base.clone() })?;
    for alpha in [1.0, 1.25, 1.5, 2.0] {
        let cfg = EngineConfig { alpha, ..base.clone() };
        let out = summarize(&g, &targets, &cfg)?;
        let rel = relative_personalized_error(&g, &out.summary, probe, alpha, &plain.summary)?;
        println!(
            "alpha {alpha:.2}: {} supernodes, {:.0} bits, relative error {:?}, {} ms",
            out.summary.supernode_count(),
            out.summary.size_bits(),
            rel.value(),
            out.report.wall_ms
        );
    }
    Ok(())
}
