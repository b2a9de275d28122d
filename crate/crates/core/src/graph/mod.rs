//! Spacetime graphs of circuit realizations: light cones of entanglement,
//! minimal spanning graphs of target spins and parasitic connections.
//!
//! Vertex `(site, t)` is the site after `t` unitary steps, `t = 0..=n_steps`.
//! A gate of step `u` is a UNITARY edge between its two sites at `t = u + 1`.
//! The IDLE edge `(s, t) - (s, t + 1)` exists unless `s` is measured in the
//! measurement layer that follows step `t - 1`; the edges leaving `t = 0`
//! always exist. Measurements in the final layer are kept as a per-site
//! flag, and measured final spins are never terminals.

mod cones;
mod export;
mod parasitic;
mod spacetime;
mod steiner;

pub use cones::{entanglement_cones, Cone, ConeForest};
pub use export::{write_adjacency_list, write_layout_csv};
pub use parasitic::{complement_sites, parasitic_edges, parasitic_score};
pub use spacetime::{build_spacetime_graph, Edge, EdgeKind, SpacetimeGraph};
pub use steiner::{
    minimal_spanning_graph, steiner_tree, SpanningGraph, SteinerMode, MAX_TERMINALS,
};

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitRecord;
use crate::error::Result;

/// Per-realization graph statistics of one target set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub realization: u64,
    pub targets: Vec<usize>,
    pub mode: SteinerMode,
    pub connected: bool,
    pub spanned: Vec<usize>,
    pub edge_count: usize,
    pub n_seeds: usize,
    pub earliest_seed_time: Option<usize>,
    /// Only defined for a connected minimal graph.
    pub parasitic_score: Option<usize>,
    /// Cones that reach the final time.
    pub n_cones: usize,
    pub n_cone_roots: usize,
}

/// Builds the spacetime graph of `record`, the minimal graph of `targets`
/// and its parasitic score towards the rest of the chain.
pub fn summarize_record(
    record: &CircuitRecord,
    targets: &[usize],
    mode: SteinerMode,
) -> Result<GraphSummary> {
    let graph = build_spacetime_graph(record);
    let g_min = minimal_spanning_graph(&graph, targets, mode)?;
    let parasitic_score = if g_min.connected {
        Some(parasitic_score(
            &graph,
            &g_min,
            &complement_sites(graph.n_sites(), targets),
        )?)
    } else {
        None
    };
    let forest = entanglement_cones(record);
    Ok(GraphSummary {
        realization: record.realization,
        targets: targets.to_vec(),
        mode,
        connected: g_min.connected,
        earliest_seed_time: g_min.earliest_seed_time(&graph),
        n_seeds: g_min.seeds.len(),
        edge_count: g_min.edge_count,
        spanned: g_min.spanned,
        parasitic_score,
        n_cones: forest.cones.len(),
        n_cone_roots: forest.roots().count(),
    })
}

impl std::str::FromStr for SteinerMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "unrestricted" => Ok(SteinerMode::Unrestricted),
            "single_seed" => Ok(SteinerMode::SingleSeed),
            _ => Err(crate::Error::Config(format!(
                "mode must be unrestricted or single-seed, got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{run_realization, Boundary, CircuitConfig};

    #[test]
    fn summary_of_unmonitored_run_is_connected() {
        let cfg = CircuitConfig::new(8, Boundary::Open, 0.0, 3).with_layers(8);
        let rec = run_realization(&cfg, 0).unwrap().record;
        let s = summarize_record(&rec, &[1, 3, 5], SteinerMode::Unrestricted).unwrap();
        assert!(s.connected);
        assert!(s.parasitic_score.unwrap() > 0);
        assert!(s.n_seeds >= 1);
    }

    #[test]
    fn fully_monitored_run_disconnects_distant_targets() {
        let cfg = CircuitConfig::new(8, Boundary::Open, 1.0, 3).with_layers(8);
        let rec = run_realization(&cfg, 0).unwrap().record;
        let s = summarize_record(&rec, &[0, 4], SteinerMode::Unrestricted).unwrap();
        assert!(!s.connected);
        assert_eq!(s.parasitic_score, None);
        assert_eq!(
            "single-seed".parse::<SteinerMode>().unwrap(),
            SteinerMode::SingleSeed
        );
    }
}
