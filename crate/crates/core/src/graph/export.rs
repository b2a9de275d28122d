use std::io::{self, Write};

use super::spacetime::{EdgeKind, SpacetimeGraph};
use super::steiner::SpanningGraph;

fn kind_code(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Unitary => "u",
        EdgeKind::Idle => "i",
    }
}

/// One line per vertex: `id site time: neighbor/kind ...`.
pub fn write_adjacency_list<W: Write>(graph: &SpacetimeGraph, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "# sites={} steps={} vertices={} edges={}",
        graph.n_sites(),
        graph.n_steps(),
        graph.n_vertices(),
        graph.edges().len()
    )?;
    for v in 0..graph.n_vertices() {
        write!(out, "{} {} {}:", v, graph.site_of(v), graph.time_of(v))?;
        let mut nbrs = graph.neighbors(v).to_vec();
        nbrs.sort_unstable();
        for (w, e) in nbrs {
            write!(out, " {}/{}", w, kind_code(graph.edges()[e].kind))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// CSV with one row per vertex and per edge, flagged by membership in the
/// minimal graph, terminal/seed status and parasitic edges.
pub fn write_layout_csv<W: Write>(
    graph: &SpacetimeGraph,
    g_min: Option<&SpanningGraph>,
    parasitic: &[usize],
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "element,id,kind,site_a,time_a,site_b,time_b,in_gmin,terminal,seed,parasitic,final_measured")?;
    let verts = g_min.map(|m| m.vertices(graph)).unwrap_or_default();
    let terminals: Vec<usize> = g_min
        .map(|m| m.spanned.iter().map(|&s| graph.final_vertex(s)).collect())
        .unwrap_or_default();
    for v in 0..graph.n_vertices() {
        let s = graph.site_of(v);
        let t = graph.time_of(v);
        let fm = t == graph.n_steps() && graph.is_final_measured(s);
        writeln!(
            out,
            "vertex,{v},vertex,{s},{t},,,{},{},0,0,{}",
            u8::from(verts.binary_search(&v).is_ok()),
            u8::from(terminals.contains(&v)),
            u8::from(fm)
        )?;
    }
    for (k, e) in graph.edges().iter().enumerate() {
        let in_min = g_min.is_some_and(|m| m.edges.binary_search(&k).is_ok());
        let seed = g_min.is_some_and(|m| m.seeds.contains(&k));
        writeln!(
            out,
            "edge,{k},{},{},{},{},{},{},0,{},{},0",
            match e.kind {
                EdgeKind::Unitary => "unitary",
                EdgeKind::Idle => "idle",
            },
            graph.site_of(e.a),
            graph.time_of(e.a),
            graph.site_of(e.b),
            graph.time_of(e.b),
            u8::from(in_min),
            u8::from(seed),
            u8::from(parasitic.binary_search(&k).is_ok())
        )?;
    }
    Ok(())
}
