//! Exact minimum-edge Steiner trees by the Dreyfus–Wagner recursion over
//! terminal subsets.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::spacetime::{EdgeKind, SpacetimeGraph, UNREACHED};
use crate::error::{Error, Result};

pub const MAX_TERMINALS: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteinerMode {
    /// Any connected subgraph of the spacetime graph.
    #[default]
    Unrestricted,
    /// Subgraphs inside the forward cone of a single seed gate.
    SingleSeed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanningGraph {
    /// Target spins as requested.
    pub requested: Vec<usize>,
    /// The connectable targets actually joined, ascending.
    pub spanned: Vec<usize>,
    /// All requested targets are joined.
    pub connected: bool,
    /// Edge ids, ascending.
    pub edges: Vec<usize>,
    pub edge_count: usize,
    /// UNITARY edges of the subgraph with no earlier IDLE edge of the
    /// subgraph at either end.
    pub seeds: Vec<usize>,
    pub mode: SteinerMode,
}

impl SpanningGraph {
    pub fn vertices(&self, graph: &SpacetimeGraph) -> Vec<usize> {
        let mut v: BTreeSet<usize> = self
            .spanned
            .iter()
            .map(|&s| graph.final_vertex(s))
            .collect();
        for &e in &self.edges {
            let edge = graph.edges()[e];
            v.insert(edge.a);
            v.insert(edge.b);
        }
        v.into_iter().collect()
    }

    /// Earliest seed step, if the subgraph has seeds.
    pub fn earliest_seed_time(&self, graph: &SpacetimeGraph) -> Option<usize> {
        self.seeds
            .iter()
            .map(|&e| graph.time_of(graph.edges()[e].a))
            .min()
    }
}

#[derive(Clone, Copy)]
enum Back {
    None,
    Leaf,
    Merge(u16),
    Step(u32, u32),
}

/// Minimum number of edges of a connected subgraph containing every vertex
/// of `terminals`, using only vertices with `allowed[v]`; the chosen edge
/// ids (ascending). `None` if the terminals are not connected.
pub fn steiner_tree(
    graph: &SpacetimeGraph,
    allowed: Option<&[bool]>,
    terminals: &[usize],
) -> Option<(usize, Vec<usize>)> {
    let k = terminals.len();
    assert!(
        (1..=MAX_TERMINALS).contains(&k),
        "1..={MAX_TERMINALS} terminals"
    );
    let ok = |v: usize| allowed.map_or(true, |m| m[v]);
    if terminals.iter().any(|&t| !ok(t)) {
        return None;
    }
    if k == 1 {
        return Some((0, Vec::new()));
    }
    let n = graph.n_vertices();
    let full = (1usize << k) - 1;
    let mut dp = vec![vec![UNREACHED; n]; full + 1];
    let mut back = vec![vec![Back::None; n]; full + 1];

    let relax = |dp: &mut Vec<u32>, back: &mut Vec<Back>| {
        let mut heap: BinaryHeap<Reverse<(u32, usize)>> = (0..n)
            .filter(|&v| dp[v] != UNREACHED)
            .map(|v| Reverse((dp[v], v)))
            .collect();
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dp[v] {
                continue;
            }
            for &(w, e) in graph.neighbors(v) {
                if ok(w) && d + 1 < dp[w] {
                    dp[w] = d + 1;
                    back[w] = Back::Step(v as u32, e as u32);
                    heap.push(Reverse((d + 1, w)));
                }
            }
        }
    };

    for (i, &t) in terminals.iter().enumerate() {
        dp[1 << i][t] = 0;
        back[1 << i][t] = Back::Leaf;
        relax(&mut dp[1 << i], &mut back[1 << i]);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        for v in 0..n {
            if !ok(v) {
                continue;
            }
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                if sub & low != 0 {
                    let (a, b) = (dp[sub][v], dp[mask ^ sub][v]);
                    if a != UNREACHED && b != UNREACHED && a + b < dp[mask][v] {
                        dp[mask][v] = a + b;
                        back[mask][v] = Back::Merge(sub as u16);
                    }
                }
                sub = (sub - 1) & mask;
            }
        }
        let (d, b) = (&mut dp[mask], &mut back[mask]);
        relax(d, b);
    }

    let root = terminals[0];
    let cost = dp[full][root];
    if cost == UNREACHED {
        return None;
    }
    let mut edges = BTreeSet::new();
    let mut stack = vec![(full, root)];
    while let Some((mask, v)) = stack.pop() {
        match back[mask][v] {
            Back::Leaf => {}
            Back::Merge(sub) => {
                stack.push((sub as usize, v));
                stack.push((mask ^ sub as usize, v));
            }
            Back::Step(u, e) => {
                edges.insert(e as usize);
                stack.push((mask, u as usize));
            }
            Back::None => unreachable!("finite entries have a back-pointer"),
        }
    }
    debug_assert_eq!(edges.len(), cost as usize);
    Some((edges.len(), edges.into_iter().collect()))
}

fn seeds_of(graph: &SpacetimeGraph, edges: &[usize]) -> Vec<usize> {
    let has_earlier_idle = |v: usize| {
        edges.iter().any(|&e| {
            let edge = graph.edges()[e];
            edge.kind == EdgeKind::Idle && edge.b == v
        })
    };
    edges
        .iter()
        .copied()
        .filter(|&e| {
            let edge = graph.edges()[e];
            edge.kind == EdgeKind::Unitary && !has_earlier_idle(edge.a) && !has_earlier_idle(edge.b)
        })
        .collect()
}

struct Candidate {
    spanned: Vec<usize>,
    cost: usize,
    edges: Vec<usize>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (Reverse(self.spanned.len()), self.cost, &self.spanned)
            < (Reverse(other.spanned.len()), other.cost, &other.spanned)
    }
}

/// Best subset of `live` targets connectable inside `allowed`: the most
/// targets, then the fewest edges, then the smallest site list.
fn best_in(graph: &SpacetimeGraph, allowed: Option<&[bool]>, live: &[usize]) -> Option<Candidate> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut placed = vec![false; live.len()];
    for a in 0..live.len() {
        if placed[a] || allowed.is_some_and(|m| !m[graph.final_vertex(live[a])]) {
            continue;
        }
        let dist = graph.bfs(&[graph.final_vertex(live[a])], allowed);
        let mut members = Vec::new();
        for b in a..live.len() {
            if !placed[b] && dist[graph.final_vertex(live[b])] != UNREACHED {
                placed[b] = true;
                members.push(live[b]);
            }
        }
        groups.push(members);
    }
    let largest = groups.iter().map(|m| m.len()).max()?;
    let mut best: Option<Candidate> = None;
    for members in groups.into_iter().filter(|m| m.len() == largest) {
        let terminals: Vec<usize> = members.iter().map(|&s| graph.final_vertex(s)).collect();
        let (cost, edges) = steiner_tree(graph, allowed, &terminals).expect("same component");
        let cand = Candidate {
            spanned: members,
            cost,
            edges,
        };
        if best.as_ref().map_or(true, |b| cand.better_than(b)) {
            best = Some(cand);
        }
    }
    best
}

/// Minimum-edge subgraph joining the final-time vertices of the largest
/// connectable subset of `targets`. Targets measured in the final layer
/// cannot be joined.
pub fn minimal_spanning_graph(
    graph: &SpacetimeGraph,
    targets: &[usize],
    mode: SteinerMode,
) -> Result<SpanningGraph> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    if targets.len() > MAX_TERMINALS {
        return Err(Error::TooManyTargets(targets.len()));
    }
    for (k, &s) in targets.iter().enumerate() {
        if s >= graph.n_sites() {
            return Err(Error::SiteOutOfRange {
                site: s,
                n_qubits: graph.n_sites(),
            });
        }
        if targets[..k].contains(&s) {
            return Err(Error::DuplicateSite(s));
        }
    }
    let mut live: Vec<usize> = targets
        .iter()
        .copied()
        .filter(|&s| !graph.is_final_measured(s))
        .collect();
    live.sort_unstable();

    let best = match mode {
        SteinerMode::Unrestricted => best_in(graph, None, &live),
        SteinerMode::SingleSeed => {
            let mut best: Option<Candidate> = None;
            for (e, edge) in graph.edges().iter().enumerate() {
                if edge.kind != EdgeKind::Unitary {
                    continue;
                }
                let reach = graph.forward_reach(e);
                let inside: Vec<usize> = live
                    .iter()
                    .copied()
                    .filter(|&s| reach[graph.final_vertex(s)])
                    .collect();
                if inside.len() < 2
                    || best
                        .as_ref()
                        .is_some_and(|b| inside.len() < b.spanned.len())
                {
                    continue;
                }
                if let Some(c) = best_in(graph, Some(&reach), &inside) {
                    if best.as_ref().map_or(true, |b| c.better_than(b)) {
                        best = Some(c);
                    }
                }
            }
            best.or_else(|| {
                live.first().map(|&s| Candidate {
                    spanned: vec![s],
                    cost: 0,
                    edges: Vec::new(),
                })
            })
        }
    };
    let best = best.unwrap_or(Candidate {
        spanned: Vec::new(),
        cost: 0,
        edges: Vec::new(),
    });
    Ok(SpanningGraph {
        requested: targets.to_vec(),
        connected: best.spanned.len() == targets.len(),
        seeds: seeds_of(graph, &best.edges),
        edge_count: best.cost,
        edges: best.edges,
        spanned: best.spanned,
        mode,
    })
}
