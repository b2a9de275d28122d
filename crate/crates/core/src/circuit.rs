//! Brickwork schedule and seeded realizations of the monitored circuit.
//!
//! One period is four layers: unitaries on the bonds `(0,1), (2,3), ...`,
//! a measurement layer, unitaries on `(1,2), (3,4), ...` (plus the wrap bond
//! `(L-1, 0)` for an even periodic chain), and another measurement layer.
//! Every site is measured in Z with probability `p` in each measurement
//! layer. The chain starts in `|0...0>`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{
    floquet_ising_gate, sample_haar_unitary, GateFamily, MeasurementEvent, StateVector,
    TwoQubitGate, MAX_QUBITS,
};

pub const DEFAULT_UNITARY_LAYERS: usize = 49;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

fn default_layers() -> usize {
    DEFAULT_UNITARY_LAYERS
}

fn default_family() -> GateFamily {
    GateFamily::Haar
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(alias = "L")]
    pub n_qubits: usize,
    pub boundary: Boundary,
    /// Probability `p` that a site is measured in a given measurement layer.
    #[serde(alias = "p")]
    pub measurement_rate: f64,
    #[serde(default = "default_layers")]
    pub n_unitary_layers: usize,
    #[serde(default = "default_family", alias = "unitary_family")]
    pub family: GateFamily,
    pub master_seed: u64,
}

impl CircuitConfig {
    pub fn new(
        n_qubits: usize,
        boundary: Boundary,
        measurement_rate: f64,
        master_seed: u64,
    ) -> Self {
        CircuitConfig {
            n_qubits,
            boundary,
            measurement_rate,
            n_unitary_layers: DEFAULT_UNITARY_LAYERS,
            family: GateFamily::Haar,
            master_seed,
        }
    }

    pub fn with_layers(mut self, n_unitary_layers: usize) -> Self {
        self.n_unitary_layers = n_unitary_layers;
        self
    }

    pub fn with_family(mut self, family: GateFamily) -> Self {
        self.family = family;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.measurement_rate) {
            return Err(Error::Config(format!(
                "measurement rate must lie in [0, 1], got {}",
                self.measurement_rate
            )));
        }
        if self.n_qubits < 2 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count must lie in 2..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.n_unitary_layers == 0 {
            return Err(Error::Config(
                "at least one unitary layer is required".into(),
            ));
        }
        if self.family == GateFamily::Custom {
            return Err(Error::Config(
                "custom gates cannot be sampled; use haar or floquet_ising".into(),
            ));
        }
        Ok(())
    }

    /// Number of unitary steps; spacetime vertices live at steps `0..=n_steps`.
    pub fn n_steps(&self) -> usize {
        self.n_unitary_layers
    }

    pub fn n_layers(&self) -> usize {
        2 * self.n_unitary_layers
    }
}

/// Which half of the bricks a unitary layer covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondParity {
    /// `(0,1), (2,3), ...`: the first layer.
    Odd,
    /// `(1,2), (3,4), ...` and the periodic wrap bond.
    Even,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Unitary {
        /// Global layer index (even).
        index: usize,
        step: usize,
        parity: BondParity,
        bonds: Vec<(usize, usize)>,
    },
    Measurement {
        /// Global layer index (odd).
        index: usize,
        /// The unitary step this layer follows.
        step: usize,
    },
}

impl Layer {
    pub fn index(&self) -> usize {
        match self {
            Layer::Unitary { index, .. } | Layer::Measurement { index, .. } => *index,
        }
    }
}

pub fn bonds(n_qubits: usize, boundary: Boundary, parity: BondParity) -> Vec<(usize, usize)> {
    let start = match parity {
        BondParity::Odd => 0,
        BondParity::Even => 1,
    };
    let mut out: Vec<(usize, usize)> = (start..n_qubits.saturating_sub(1))
        .step_by(2)
        .map(|i| (i, i + 1))
        .collect();
    if parity == BondParity::Even
        && boundary == Boundary::Periodic
        && n_qubits % 2 == 0
        && n_qubits > 2
    {
        out.push((n_qubits - 1, 0));
    }
    out
}

/// Alternating unitary / measurement layers, `2 * n_unitary_layers` in total.
pub fn build_layer_schedule(config: &CircuitConfig) -> Vec<Layer> {
    let odd = bonds(config.n_qubits, config.boundary, BondParity::Odd);
    let even = bonds(config.n_qubits, config.boundary, BondParity::Even);
    let mut layers = Vec::with_capacity(config.n_layers());
    for step in 0..config.n_unitary_layers {
        let (parity, b) = if step % 2 == 0 {
            (BondParity::Odd, &odd)
        } else {
            (BondParity::Even, &even)
        };
        layers.push(Layer::Unitary {
            index: 2 * step,
            step,
            parity,
            bonds: b.clone(),
        });
        layers.push(Layer::Measurement {
            index: 2 * step + 1,
            step,
        });
    }
    layers
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateEvent {
    pub layer: usize,
    pub step: usize,
    pub bond: (usize, usize),
    /// Seed from which the gate matrix is regenerated (Haar family).
    pub gate_seed: u64,
}

/// Complete event log of one realization; enough to replay the final state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub config: CircuitConfig,
    pub realization: u64,
    pub gates: Vec<GateEvent>,
    pub measurements: Vec<MeasurementEvent>,
}

impl CircuitRecord {
    /// Sites measured in the measurement layer after unitary `step`.
    pub fn measured_after(&self, step: usize) -> impl Iterator<Item = usize> + '_ {
        let layer = 2 * step + 1;
        self.measurements
            .iter()
            .filter(move |m| m.layer == layer)
            .map(|m| m.site)
    }

    /// `measured[step][site]` table.
    pub fn measurement_table(&self) -> Vec<Vec<bool>> {
        let mut table = vec![vec![false; self.config.n_qubits]; self.config.n_steps()];
        for m in &self.measurements {
            table[(m.layer - 1) / 2][m.site] = true;
        }
        table
    }
}

pub struct RealizationResult {
    pub state: StateVector,
    pub record: CircuitRecord,
}

/// RNG stream of realization `k`: ChaCha8 keyed by the master seed, with
/// `k` selecting one of its 2^64 independent streams.
pub fn realization_rng(master_seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization);
    rng
}

pub fn gate_for(family: GateFamily, gate_seed: u64) -> Result<TwoQubitGate> {
    match family {
        GateFamily::Haar => Ok(sample_haar_unitary(&mut ChaCha8Rng::seed_from_u64(
            gate_seed,
        ))),
        GateFamily::FloquetIsing(p) => Ok(floquet_ising_gate(p)),
        GateFamily::Custom => Err(Error::Config("custom gates cannot be regenerated".into())),
    }
}

/// Runs realization `realization` from `|0...0>` to the end of the schedule.
pub fn run_realization(config: &CircuitConfig, realization: u64) -> Result<RealizationResult> {
    run_realization_observed(config, realization, |_, _| Ok(()))
}

/// As [`run_realization`], calling `observer` after every layer.
pub fn run_realization_observed<F>(
    config: &CircuitConfig,
    realization: u64,
    mut observer: F,
) -> Result<RealizationResult>
where
    F: FnMut(&Layer, &StateVector) -> Result<()>,
{
    config.validate()?;
    let mut rng = realization_rng(config.master_seed, realization);
    let mut state = StateVector::zero(config.n_qubits)?;
    let mut record = CircuitRecord {
        config: config.clone(),
        realization,
        gates: Vec::new(),
        measurements: Vec::new(),
    };
    let fixed_gate = match config.family {
        GateFamily::FloquetIsing(p) => Some(floquet_ising_gate(p)),
        _ => None,
    };
    for layer in build_layer_schedule(config) {
        match &layer {
            Layer::Unitary {
                index, step, bonds, ..
            } => {
                for &(i, j) in bonds {
                    let gate_seed = rng.next_u64();
                    match &fixed_gate {
                        Some(g) => state.apply_two_qubit_gate(g, i, j)?,
                        None => state.apply_two_qubit_gate(
                            &gate_for(config.family, gate_seed)?,
                            i,
                            j,
                        )?,
                    }
                    record.gates.push(GateEvent {
                        layer: *index,
                        step: *step,
                        bond: (i, j),
                        gate_seed,
                    });
                }
            }
            Layer::Measurement { index, .. } => {
                for site in 0..config.n_qubits {
                    if rng.gen::<f64>() < config.measurement_rate {
                        record
                            .measurements
                            .push(state.measure_z(site, *index, &mut rng)?);
                    }
                }
            }
        }
        observer(&layer, &state)?;
    }
    Ok(RealizationResult { state, record })
}

/// Rebuilds the final state from the gate seeds and recorded outcomes.
pub fn replay(record: &CircuitRecord) -> Result<StateVector> {
    replay_observed(record, |_, _| Ok(()))
}

/// Replays `record`, calling `observer` after every layer.
pub fn replay_observed<F>(record: &CircuitRecord, mut observer: F) -> Result<StateVector>
where
    F: FnMut(&Layer, &StateVector) -> Result<()>,
{
    let config = &record.config;
    config.validate()?;
    let mut state = StateVector::zero(config.n_qubits)?;
    let mut gates = record.gates.iter().peekable();
    let mut meas = record.measurements.iter().peekable();
    for layer in build_layer_schedule(config) {
        let index = layer.index();
        if matches!(layer, Layer::Unitary { .. }) {
            while let Some(g) = gates.next_if(|g| g.layer == index) {
                state.apply_two_qubit_gate(
                    &gate_for(config.family, g.gate_seed)?,
                    g.bond.0,
                    g.bond.1,
                )?;
            }
        } else {
            while let Some(m) = meas.next_if(|m| m.layer == index) {
                state.project_z(m.site, m.outcome, index)?;
            }
        }
        observer(&layer, &state)?;
    }
    if gates.next().is_some() || meas.next().is_some() {
        return Err(Error::Config(
            "record contains events outside the schedule".into(),
        ));
    }
    Ok(state)
}
