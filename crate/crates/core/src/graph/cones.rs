use serde::Serialize;

use crate::circuit::CircuitRecord;

/// Forward light cone of one gate (the seed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cone {
    /// Index of the seed in the record's gate list.
    pub gate: usize,
    pub seed_step: usize,
    pub bond: (usize, usize),
    /// Active sites (bit `s` = site `s`) after the measurement layer that
    /// follows step `seed_step + k`, for `k = 0, 1, ...`.
    pub active: Vec<u64>,
    /// Sites the cone reaches in the final state, ascending.
    pub final_sites: Vec<usize>,
    /// Earliest cone of the forest that already covers a seed site when
    /// this seed acts.
    pub parent: Option<usize>,
}

impl Cone {
    /// Active sites after step `step`, if the cone exists then.
    pub fn active_after(&self, step: usize) -> Option<u64> {
        step.checked_sub(self.seed_step)
            .and_then(|k| self.active.get(k))
            .copied()
    }

    /// Largest number of simultaneously active sites.
    pub fn max_width(&self) -> usize {
        self.active
            .iter()
            .map(|a| a.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeForest {
    pub n_sites: usize,
    pub n_steps: usize,
    /// Cones that reach the final state, ordered by seed (earliest first).
    pub cones: Vec<Cone>,
    /// Number of gates examined.
    pub n_seeds: usize,
}

impl ConeForest {
    /// Roots of the sub-cone trees.
    pub fn roots(&self) -> impl Iterator<Item = &Cone> {
        self.cones.iter().filter(|c| c.parent.is_none())
    }

    pub fn children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.cones
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.parent == Some(index))
            .map(|(k, _)| k)
    }
}

fn bits_to_sites(bits: u64) -> Vec<usize> {
    (0..64).filter(|s| (bits >> s) & 1 == 1).collect()
}

/// Propagates every gate's cone step by step: a gate touching an active site
/// activates both of its sites, and measured sites drop out. Cones that die
/// before the final state are discarded.
pub fn entanglement_cones(record: &CircuitRecord) -> ConeForest {
    let n_sites = record.config.n_qubits;
    let n_steps = record.config.n_steps();
    assert!(n_sites <= 64, "cone bitsets hold at most 64 sites");
    let measured: Vec<u64> = record
        .measurement_table()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, m)| **m)
                .fold(0u64, |acc, (s, _)| acc | 1 << s)
        })
        .collect();
    let mut by_step: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_steps];
    for g in &record.gates {
        by_step[g.step].push(g.bond);
    }

    let mut cones: Vec<Cone> = Vec::new();
    for (gi, g) in record.gates.iter().enumerate() {
        let (i, j) = g.bond;
        let mut active = (1u64 << i) | (1u64 << j);
        let mut trail = Vec::with_capacity(n_steps - g.step);
        for step in g.step..n_steps {
            if step > g.step {
                for &(a, b) in &by_step[step] {
                    if active & ((1 << a) | (1 << b)) != 0 {
                        active |= (1 << a) | (1 << b);
                    }
                }
            }
            active &= !measured[step];
            trail.push(active);
            if active == 0 {
                break;
            }
        }
        if active == 0 {
            continue;
        }
        let parent = cones.iter().position(|c| {
            g.step > c.seed_step
                && c.active_after(g.step - 1)
                    .is_some_and(|a| a & ((1 << i) | (1 << j)) != 0)
        });
        cones.push(Cone {
            gate: gi,
            seed_step: g.step,
            bond: g.bond,
            final_sites: bits_to_sites(active),
            active: trail,
            parent,
        });
    }
    ConeForest {
        n_sites,
        n_steps,
        cones,
        n_seeds: record.gates.len(),
    }
}
