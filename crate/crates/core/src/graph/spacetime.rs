use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitRecord;

pub(crate) const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Unitary,
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    /// For IDLE edges `a` is the earlier vertex.
    pub a: usize,
    pub b: usize,
    /// Index into the record's gate list for UNITARY edges.
    pub gate: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeGraph {
    n_sites: usize,
    n_steps: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    final_measured: Vec<bool>,
}

/// Graph of a recorded realization.
pub fn build_spacetime_graph(record: &CircuitRecord) -> SpacetimeGraph {
    SpacetimeGraph::from_record(record)
}

impl SpacetimeGraph {
    pub fn from_record(record: &CircuitRecord) -> Self {
        let gates: Vec<(usize, usize, usize)> = record
            .gates
            .iter()
            .map(|g| (g.step, g.bond.0, g.bond.1))
            .collect();
        Self::from_events(
            record.config.n_qubits,
            record.config.n_steps(),
            &gates,
            &record.measurement_table(),
        )
    }

    /// `gates` are `(step, i, j)` in schedule order; `measured[step][site]`
    /// marks a measurement in the layer after `step`.
    pub fn from_events(
        n_sites: usize,
        n_steps: usize,
        gates: &[(usize, usize, usize)],
        measured: &[Vec<bool>],
    ) -> Self {
        assert_eq!(measured.len(), n_steps, "one measurement row per step");
        let mut g = SpacetimeGraph {
            n_sites,
            n_steps,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n_sites * (n_steps + 1)],
            final_measured: if n_steps > 0 {
                measured[n_steps - 1].clone()
            } else {
                vec![false; n_sites]
            },
        };
        let mut next_gate = 0;
        for t in 0..=n_steps {
            if t > 0 {
                while next_gate < gates.len() && gates[next_gate].0 == t - 1 {
                    let (_, i, j) = gates[next_gate];
                    g.push(
                        EdgeKind::Unitary,
                        g.vertex(i, t),
                        g.vertex(j, t),
                        Some(next_gate),
                    );
                    next_gate += 1;
                }
            }
            if t < n_steps {
                for s in 0..n_sites {
                    if t == 0 || !measured[t - 1][s] {
                        g.push(EdgeKind::Idle, g.vertex(s, t), g.vertex(s, t + 1), None);
                    }
                }
            }
        }
        assert_eq!(
            next_gate,
            gates.len(),
            "gates must be ordered by step and lie inside the schedule"
        );
        g
    }

    fn push(&mut self, kind: EdgeKind, a: usize, b: usize, gate: Option<usize>) {
        let id = self.edges.len();
        self.edges.push(Edge { kind, a, b, gate });
        self.adjacency[a].push((b, id));
        self.adjacency[b].push((a, id));
    }

    /// Copy with one additional edge.
    pub fn with_edge(&self, kind: EdgeKind, a: usize, b: usize) -> Self {
        let mut g = self.clone();
        g.push(kind, a, b, None);
        g
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn vertex(&self, site: usize, time: usize) -> usize {
        time * self.n_sites + site
    }

    pub fn site_of(&self, v: usize) -> usize {
        v % self.n_sites
    }

    pub fn time_of(&self, v: usize) -> usize {
        v / self.n_sites
    }

    pub fn final_vertex(&self, site: usize) -> usize {
        self.vertex(site, self.n_steps)
    }

    pub fn is_final_measured(&self, site: usize) -> bool {
        self.final_measured[site]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Hop distances from `sources` over vertices with `allowed[v]`.
    pub(crate) fn bfs(&self, sources: &[usize], allowed: Option<&[bool]>) -> Vec<u32> {
        let ok = |v: usize| allowed.map_or(true, |m| m[v]);
        let mut dist = vec![UNREACHED; self.n_vertices()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if ok(s) && dist[s] == UNREACHED {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adjacency[v] {
                if ok(w) && dist[w] == UNREACHED {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices reachable from the seed gate's two vertices moving forward
    /// in time along IDLE edges and across UNITARY edges.
    pub fn forward_reach(&self, seed_edge: usize) -> Vec<bool> {
        let e = self.edges[seed_edge];
        let mut seen = vec![false; self.n_vertices()];
        let mut stack = vec![e.a, e.b];
        seen[e.a] = true;
        seen[e.b] = true;
        while let Some(v) = stack.pop() {
            for &(w, id) in &self.adjacency[v] {
                let forward = match self.edges[id].kind {
                    EdgeKind::Unitary => true,
                    EdgeKind::Idle => self.time_of(w) > self.time_of(v),
                };
                if forward && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}
