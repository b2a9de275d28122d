//! The spacetime graph of one realization: the minimal subgraph joining a
//! triple, its parasitic edges and the light cones of the gates.

use gme_circuits::circuit::{run_realization, Boundary, CircuitConfig};
use gme_circuits::graph::{
    build_spacetime_graph, complement_sites, entanglement_cones, minimal_spanning_graph,
    parasitic_edges, write_layout_csv, SteinerMode,
};

fn main() -> gme_circuits::Result<()> {
    let config = CircuitConfig::new(12, Boundary::Open, 0.3, 11).with_layers(16);
    let targets = [4, 5, 6];
    // First realization in which the targets can be joined.
    let mut k = 0;
    let (record, graph) = loop {
        let record = run_realization(&config, k)?.record;
        let graph = build_spacetime_graph(&record);
        if minimal_spanning_graph(&graph, &targets, SteinerMode::Unrestricted)?.connected {
            break (record, graph);
        }
        k += 1;
    };
    println!("realization {k}");
    println!(
        "{} vertices, {} edges",
        graph.n_vertices(),
        graph.edges().len()
    );

    for mode in [SteinerMode::Unrestricted, SteinerMode::SingleSeed] {
        let g = minimal_spanning_graph(&graph, &targets, mode)?;
        println!(
            "{mode:?}: connected {}, {} edges, {} seeds, earliest seed step {:?}",
            g.connected,
            g.edge_count,
            g.seeds.len(),
            g.earliest_seed_time(&graph)
        );
    }

    let g_min = minimal_spanning_graph(&graph, &targets, SteinerMode::Unrestricted)?;
    let env = complement_sites(config.n_qubits, &targets);
    let parasitic = parasitic_edges(&graph, &g_min, &env)?;
    println!("{} parasitic edges", parasitic.len());

    let forest = entanglement_cones(&record);
    let widest = forest
        .cones
        .iter()
        .map(|c| c.max_width())
        .max()
        .unwrap_or(0);
    println!(
        "{} cones reach the final layer, widest spans {widest} sites",
        forest.cones.len()
    );

    // Per-vertex and per-edge table for plotting.
    let mut buf = Vec::new();
    write_layout_csv(&graph, Some(&g_min), &parasitic, &mut buf).expect("in-memory write");
    for line in String::from_utf8_lossy(&buf).lines().take(8) {
        println!("{line}");
    }
    Ok(())
}
