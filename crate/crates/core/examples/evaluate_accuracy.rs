//! Query-accuracy trend: plain versus personalized summaries at equal budget.
//!
//! Run with `cargo run --release --example evaluate_accuracy`.

use pegasus::eval::{query_accuracy_trend, write_csv, TrendConfig};
use pegasus::graph::generate_ba;
use pegasus::query::QueryKind;

fn main() -> pegasus::Result<()> {
    let g = generate_ba(1500, 4, 2)?;
    let config = TrendConfig::new("ba-1500", 0.5, vec![0, 1, 2]);
    let rows = query_accuracy_trend(&g, &config, 50, &[1.0, 1.25], &[QueryKind::Rwr, QueryKind::Hop])?;
    write_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}
