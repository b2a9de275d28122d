//! Ensembles of realizations: observables evaluated on the final state (or
//! after every layer) and streamed to a sink in realization order.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    replay_observed, run_realization_observed, Boundary, CircuitConfig, CircuitRecord, Layer,
    DEFAULT_UNITARY_LAYERS,
};
use crate::density::{log_negativity, partial_trace};
use crate::error::{Error, Result};
use crate::measures::{
    geometric_entanglement, i2_criterion, w4_criterion, w_criterion, GmeResult, DEFAULT_MAX_TERMS,
};
use crate::optimize::OptimizerConfig;
use crate::positions::PositionSpec;
use crate::state::GateFamily;
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    /// Logarithmic negativity between the first spin and the rest.
    E,
    W,
    I2,
    W4,
    /// Geometric entanglement.
    D,
}

impl Observable {
    pub const ALL: [Observable; 5] = [
        Observable::E,
        Observable::W,
        Observable::I2,
        Observable::W4,
        Observable::D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::E => "E",
            Observable::W => "W",
            Observable::I2 => "I2",
            Observable::W4 => "W4",
            Observable::D => "D",
        }
    }

    fn code(self) -> u64 {
        self as u64 + 1
    }

    pub fn accepts_spins(self, m: usize) -> bool {
        match self {
            Observable::E => m >= 2,
            Observable::W | Observable::D => m == 3,
            Observable::I2 => m == 3 || m == 4,
            Observable::W4 => m == 4,
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown observable {s:?}; expected E, W, I2, W4 or D"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableRequest {
    pub observable: Observable,
    pub positions: PositionSpec,
    /// Restrict to these separations; all admissible ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separations: Option<Vec<usize>>,
}

impl ObservableRequest {
    pub fn new(observable: Observable, positions: PositionSpec) -> Self {
        ObservableRequest {
            observable,
            positions,
            separations: None,
        }
    }

    pub fn at(mut self, separations: &[usize]) -> Self {
        self.separations = Some(separations.to_vec());
        self
    }

    pub fn validate(&self, config: &CircuitConfig) -> Result<()> {
        let m = self.positions.n_spins();
        if !self.observable.accepts_spins(m) {
            return Err(Error::Config(format!(
                "{} cannot be evaluated on {}-spin positions {}",
                self.observable, m, self.positions
            )));
        }
        self.positions
            .enumerate(
                config.n_qubits,
                config.boundary,
                self.separations.as_deref(),
            )
            .map(|_| ())
    }
}

fn default_w() -> OptimizerConfig {
    OptimizerConfig::with_restarts(24)
}

fn default_many() -> OptimizerConfig {
    OptimizerConfig::with_restarts(50)
}

fn default_geometric() -> OptimizerConfig {
    OptimizerConfig::with_restarts(30)
}

fn default_max_terms() -> usize {
    DEFAULT_MAX_TERMS
}

/// Search budgets of the optimized criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureOptions {
    #[serde(default = "default_w")]
    pub w: OptimizerConfig,
    #[serde(default = "default_many")]
    pub i2: OptimizerConfig,
    #[serde(default = "default_many")]
    pub w4: OptimizerConfig,
    /// Budget of each mixture size of D.
    #[serde(default = "default_geometric")]
    pub geometric: OptimizerConfig,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
}

impl MeasureOptions {
    /// Budget for large ensembles: 8 restarts and 1500 iterations per run
    /// for W, I2 and W4, 4 restarts per mixture size for D.
    pub fn ensemble() -> Self {
        let quick = OptimizerConfig {
            n_restarts: 8,
            max_iterations: 1500,
            tolerance: 1e-10,
            ..OptimizerConfig::default()
        };
        MeasureOptions {
            w: quick,
            i2: quick,
            w4: quick,
            geometric: OptimizerConfig {
                n_restarts: 4,
                ..quick
            },
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    /// The same budget for every criterion.
    pub fn uniform(cfg: OptimizerConfig) -> Self {
        MeasureOptions {
            w: cfg,
            i2: cfg,
            w4: cfg,
            geometric: cfg,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for c in [&self.w, &self.i2, &self.w4, &self.geometric] {
            c.validate()?;
        }
        if self.max_terms == 0 {
            return Err(Error::Config("max_terms must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            w: default_w(),
            i2: default_many(),
            w4: default_many(),
            geometric: default_geometric(),
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMeta {
    pub x: usize,
    /// Unclamped criterion value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<f64>,
    #[serde(default)]
    pub restarts: usize,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default = "yes")]
    pub converged: bool,
    #[serde(default)]
    pub screened: bool,
    /// Layer after which the value was taken; absent for final-state rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<usize>,
}

fn yes() -> bool {
    true
}

/// One persisted value: a realization, an observable and a position tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub realization: u64,
    pub observable: Observable,
    pub positions: Vec<usize>,
    pub value: f64,
    pub meta: RowMeta,
}

/// Parameters of a full ensemble run.
///
/// The serialized form is flat: circuit keys sit next to the ensemble keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SpecFile", into = "SpecFile")]
pub struct EnsembleSpec {
    pub circuit: CircuitConfig,
    pub n_realizations: u64,
    /// Evaluate after every layer instead of only at the end.
    pub time_resolved: bool,
    pub observables: Vec<ObservableRequest>,
    pub measure: MeasureOptions,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(alias = "L")]
    n_qubits: usize,
    boundary: Boundary,
    #[serde(alias = "p")]
    measurement_rate: f64,
    #[serde(default = "default_layers")]
    n_unitary_layers: usize,
    #[serde(default = "default_family", alias = "unitary_family")]
    family: GateFamily,
    master_seed: u64,
    #[serde(default)]
    n_realizations: u64,
    #[serde(default)]
    time_resolved: bool,
    #[serde(default)]
    observables: Vec<ObservableRequest>,
    #[serde(default)]
    measure: MeasureOptions,
}

fn default_layers() -> usize {
    DEFAULT_UNITARY_LAYERS
}

fn default_family() -> GateFamily {
    GateFamily::Haar
}

impl From<SpecFile> for EnsembleSpec {
    fn from(f: SpecFile) -> Self {
        EnsembleSpec {
            circuit: CircuitConfig {
                n_qubits: f.n_qubits,
                boundary: f.boundary,
                measurement_rate: f.measurement_rate,
                n_unitary_layers: f.n_unitary_layers,
                family: f.family,
                master_seed: f.master_seed,
            },
            n_realizations: f.n_realizations,
            time_resolved: f.time_resolved,
            observables: f.observables,
            measure: f.measure,
        }
    }
}

impl From<EnsembleSpec> for SpecFile {
    fn from(s: EnsembleSpec) -> Self {
        let c = s.circuit;
        SpecFile {
            n_qubits: c.n_qubits,
            boundary: c.boundary,
            measurement_rate: c.measurement_rate,
            n_unitary_layers: c.n_unitary_layers,
            family: c.family,
            master_seed: c.master_seed,
            n_realizations: s.n_realizations,
            time_resolved: s.time_resolved,
            observables: s.observables,
            measure: s.measure,
        }
    }
}

impl EnsembleSpec {
    pub fn new(circuit: CircuitConfig, n_realizations: u64) -> Self {
        EnsembleSpec {
            circuit,
            n_realizations,
            time_resolved: false,
            observables: Vec::new(),
            measure: MeasureOptions::default(),
        }
    }

    pub fn observe(mut self, request: ObservableRequest) -> Self {
        self.observables.push(request);
        self
    }

    /// Parses a TOML document with flat circuit keys.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("ensemble specs serialize to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        self.measure.validate()?;
        for r in &self.observables {
            r.validate(&self.circuit)?;
        }
        Ok(())
    }
}

/// Named experiment setups; scale them with the realization count.
pub const PRESETS: [&str; 5] = [
    "obc-triples",
    "obc-triples-14",
    "pbc-pairs",
    "pbc-critical",
    "pbc-critical-16",
];

/// Critical measurement rate of the Haar brickwork circuit.
pub const CRITICAL_RATE: f64 = 0.17;

/// Builds a preset by name (see [`PRESETS`]):
///
/// * `obc-triples`: 18 open sites at `p = 0.3`, `W` on `(i,i+x,i+2x)`.
/// * `obc-triples-14`: the same on 14 sites.
/// * `pbc-pairs`: 24 periodic sites at the critical rate, `E` on `(i,i+x)`.
/// * `pbc-critical`: 24 periodic sites at the critical rate, `E` on pairs
///   and `W`, `I2` on triples.
/// * `pbc-critical-16`: the previous one on 16 sites.
pub fn preset(name: &str, n_realizations: u64, master_seed: u64) -> Result<EnsembleSpec> {
    let triples = |o| ObservableRequest::new(o, PositionSpec::triple());
    let pairs = ObservableRequest::new(Observable::E, PositionSpec::pair());
    let spec =
        |l, b, p| EnsembleSpec::new(CircuitConfig::new(l, b, p, master_seed), n_realizations);
    Ok(match name {
        "obc-triples" => spec(18, Boundary::Open, 0.3).observe(triples(Observable::W)),
        "obc-triples-14" => spec(14, Boundary::Open, 0.3).observe(triples(Observable::W)),
        "pbc-pairs" => spec(24, Boundary::Periodic, CRITICAL_RATE).observe(pairs),
        "pbc-critical" | "pbc-critical-16" => {
            let l = if name == "pbc-critical" { 24 } else { 16 };
            spec(l, Boundary::Periodic, CRITICAL_RATE)
                .observe(pairs)
                .observe(triples(Observable::W))
                .observe(triples(Observable::I2))
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    })
}

pub struct RealizationOutput {
    pub realization: u64,
    pub record: CircuitRecord,
    pub rows: Vec<Row>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Optimizer RNG of one evaluation, a pure function of its coordinates.
pub fn evaluation_rng(
    master_seed: u64,
    realization: u64,
    observable: Observable,
    positions: &[usize],
    layer: Option<usize>,
) -> ChaCha8Rng {
    let mut h = splitmix(master_seed);
    h = splitmix(h ^ realization);
    h = splitmix(h ^ observable.code());
    for &p in positions {
        h = splitmix(h ^ p as u64);
    }
    h = splitmix(h ^ layer.map_or(u64::MAX, |l| l as u64));
    ChaCha8Rng::seed_from_u64(h)
}

fn criterion_meta(x: usize, r: &GmeResult, layer: Option<usize>) -> RowMeta {
    RowMeta {
        x,
        raw: Some(r.raw_value),
        restarts: r.n_restarts,
        iterations: r.n_iterations,
        converged: r.converged,
        screened: r.screened,
        layer,
    }
}

/// Value of `observable` on the spins `positions` of `state`.
pub fn evaluate(
    state: &StateVector,
    observable: Observable,
    positions: &[usize],
    x: usize,
    options: &MeasureOptions,
    rng: &mut ChaCha8Rng,
    layer: Option<usize>,
) -> Result<(f64, RowMeta)> {
    let rho = partial_trace(state, positions)?;
    let out = match observable {
        Observable::E => {
            let v = log_negativity(&rho, &[0]);
            (
                v,
                RowMeta {
                    x,
                    raw: None,
                    restarts: 0,
                    iterations: 0,
                    converged: true,
                    screened: false,
                    layer,
                },
            )
        }
        Observable::W => {
            let r = w_criterion(&rho, &options.w, rng)?;
            (r.value, criterion_meta(x, &r, layer))
        }
        Observable::I2 => {
            let r = i2_criterion(&rho, &options.i2, rng)?;
            (r.value, criterion_meta(x, &r, layer))
        }
        Observable::W4 => {
            let r = w4_criterion(&rho, &options.w4, rng)?;
            (r.value, criterion_meta(x, &r, layer))
        }
        Observable::D => {
            let g = geometric_entanglement(&rho, options.max_terms, &options.geometric, rng)?;
            (g.result.value, criterion_meta(x, &g.result, layer))
        }
    };
    Ok(out)
}

/// Rows of every requested observable and position tuple on one state.
pub fn evaluate_requests(
    state: &StateVector,
    config: &CircuitConfig,
    realization: u64,
    requests: &[ObservableRequest],
    options: &MeasureOptions,
    layer: Option<usize>,
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for req in requests {
        let groups = req.positions.enumerate(
            config.n_qubits,
            config.boundary,
            req.separations.as_deref(),
        )?;
        for g in groups {
            for tuple in g.tuples {
                let mut rng = evaluation_rng(
                    config.master_seed,
                    realization,
                    req.observable,
                    &tuple,
                    layer,
                );
                let (value, meta) =
                    evaluate(state, req.observable, &tuple, g.x, options, &mut rng, layer)?;
                rows.push(Row {
                    realization,
                    observable: req.observable,
                    positions: tuple,
                    value,
                    meta,
                });
            }
        }
    }
    Ok(rows)
}

fn observe_layers<'a>(
    spec: &'a EnsembleSpec,
    realization: u64,
    rows: &'a mut Vec<Row>,
) -> impl FnMut(&Layer, &StateVector) -> Result<()> + 'a {
    let time_resolved = spec.time_resolved;
    let last = spec.circuit.n_layers() - 1;
    move |layer: &Layer, state: &StateVector| {
        let index = layer.index();
        if time_resolved || index == last {
            let tag = time_resolved.then_some(index);
            rows.extend(evaluate_requests(
                state,
                &spec.circuit,
                realization,
                &spec.observables,
                &spec.measure,
                tag,
            )?);
        }
        Ok(())
    }
}

/// Runs one realization and evaluates the requested observables.
pub fn run_one(spec: &EnsembleSpec, realization: u64) -> Result<RealizationOutput> {
    let mut rows = Vec::new();
    let result = run_realization_observed(
        &spec.circuit,
        realization,
        observe_layers(spec, realization, &mut rows),
    )?;
    Ok(RealizationOutput {
        realization,
        record: result.record,
        rows,
    })
}

/// Replays a stored record and evaluates `spec.observables` on it.
pub fn remeasure(spec: &EnsembleSpec, record: &CircuitRecord) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    replay_observed(record, observe_layers(spec, record.realization, &mut rows))?;
    Ok(rows)
}

/// Worker pool with `threads` workers (at least one).
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Applies `work` to `0..n` on the pool in batches and hands the results to
/// `sink` in index order, so the output does not depend on the pool size.
pub fn for_each_ordered<T, W, S>(
    pool: &rayon::ThreadPool,
    n: u64,
    work: W,
    mut sink: S,
) -> Result<()>
where
    T: Send,
    W: Fn(u64) -> Result<T> + Sync,
    S: FnMut(T) -> Result<()>,
{
    let batch = (pool.current_num_threads() as u64 * 4).max(8);
    let mut start = 0;
    while start < n {
        let end = (start + batch).min(n);
        let results: Vec<Result<T>> =
            pool.install(|| (start..end).into_par_iter().map(&work).collect());
        for r in results {
            sink(r?)?;
        }
        start = end;
    }
    Ok(())
}

/// Runs realizations `0..n_realizations` on `parallelism` workers.
pub fn run_ensemble<S>(spec: &EnsembleSpec, parallelism: usize, sink: S) -> Result<()>
where
    S: FnMut(RealizationOutput) -> Result<()>,
{
    spec.validate()?;
    let pool = thread_pool(parallelism)?;
    for_each_ordered(&pool, spec.n_realizations, |k| run_one(spec, k), sink)
}
