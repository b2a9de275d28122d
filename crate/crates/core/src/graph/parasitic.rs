use super::spacetime::{SpacetimeGraph, UNREACHED};
use super::steiner::SpanningGraph;
use crate::error::{Error, Result};

/// Sites of an `n_sites` chain outside `a`.
pub fn complement_sites(n_sites: usize, a: &[usize]) -> Vec<usize> {
    (0..n_sites).filter(|s| !a.contains(s)).collect()
}

/// Edges that leave the vertex set of `g_min` and start a path to an
/// unmeasured final-time vertex of a `b` site that does not pass through
/// `g_min` again; ascending edge ids.
pub fn parasitic_edges(
    graph: &SpacetimeGraph,
    g_min: &SpanningGraph,
    b: &[usize],
) -> Result<Vec<usize>> {
    if !g_min.connected {
        return Err(Error::OutOfRange(
            "parasitic score needs a connected minimal graph".into(),
        ));
    }
    let mut inside = vec![false; graph.n_vertices()];
    for v in g_min.vertices(graph) {
        inside[v] = true;
    }
    let outside: Vec<bool> = inside.iter().map(|x| !x).collect();
    let sinks: Vec<usize> = b
        .iter()
        .filter(|&&s| s < graph.n_sites() && !graph.is_final_measured(s))
        .map(|&s| graph.final_vertex(s))
        .collect();
    // Vertices outside G_min that can still reach a B spin.
    let reach = graph.bfs(&sinks, Some(&outside));
    let mut out: Vec<usize> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            (inside[e.a] && !inside[e.b] && reach[e.b] != UNREACHED)
                || (inside[e.b] && !inside[e.a] && reach[e.a] != UNREACHED)
        })
        .map(|(k, _)| k)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Number of parasitic edges of `g_min` towards the spins `b`.
pub fn parasitic_score(
    graph: &SpacetimeGraph,
    g_min: &SpanningGraph,
    b: &[usize],
) -> Result<usize> {
    parasitic_edges(graph, g_min, b).map(|e| e.len())
}
