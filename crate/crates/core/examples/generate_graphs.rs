//! Generates the synthetic graph families and prints their basic statistics.
//!
//! Run with `cargo run --release --example generate_graphs`.

use pegasus::graph::{effective_diameter, generate_ba, generate_two_community, generate_ws, write_edge_list};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graphs = [
        ("ba", generate_ba(3000, 4, 1)?),
        ("ws", generate_ws(3000, 6, 0.1, 1)?),
        ("two-community", generate_two_community(1500, 4, 30, 1)?),
    ];
    for (name, g) in &graphs {
        let diameter = effective_diameter(g, 0.9)?;
        println!(
            "{name}: nodes={} edges={} size_bits={:.1} effective_diameter={diameter:?}",
            g.node_count(),
            g.edge_count(),
            g.size_bits()
        );
    }
    let mut head = Vec::new();
    write_edge_list(&graphs[0].1, &mut head)?;
    let text = String::from_utf8_lossy(&head);
    println!("first ba edges:\n{}", text.lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
