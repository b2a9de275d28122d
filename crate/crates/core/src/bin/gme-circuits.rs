//! Command-line driver: simulate ensembles, measure persisted datasets,
//! analyze spacetime graphs and fit power laws.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gme_circuits::circuit::Boundary;
use gme_circuits::dataset::{
    mark_partial, merge_rows, read_records, read_rows, write_jsonl, DatasetWriter, RunManifest,
    RunStatus, AGGREGATED_FILE, MANIFEST_FILE,
};
use gme_circuits::ensemble::{
    for_each_ordered, preset, remeasure, run_ensemble, thread_pool, EnsembleSpec, MeasureOptions,
    Observable, ObservableRequest, PRESETS,
};
use gme_circuits::graph::{
    build_spacetime_graph, complement_sites, minimal_spanning_graph, parasitic_edges,
    summarize_record, write_adjacency_list, write_layout_csv, GraphSummary, SteinerMode,
};
use gme_circuits::positions::PositionSpec;
use gme_circuits::scaling::{
    aggregate_all, fit_plot_data, fit_power_law, read_series_csv, series_plot_data,
    write_series_csv, FitDomain, FitOptions, Parity,
};
use gme_circuits::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gme-circuits",
    version,
    about = "Monitored random circuits and their multipartite entanglement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Workers {
    /// Worker threads [default: all cores].
    #[arg(long, env = "GME_THREADS")]
    threads: Option<usize>,
}

impl Workers {
    fn count(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write rows, records, the aggregated series and a manifest.
    Simulate {
        /// TOML file with circuit keys, n_realizations and observables.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Built-in setup: obc-triples, obc-triples-14, pbc-pairs, pbc-critical, pbc-critical-16.
        #[arg(long)]
        preset: Option<String>,
        /// Number of realizations (overrides the config).
        #[arg(long)]
        n: Option<u64>,
        /// Measurement rate (overrides the config).
        #[arg(long)]
        p: Option<f64>,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Unitary layers (overrides the config).
        #[arg(long)]
        layers: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Do not keep circuit records (measure and graphs need them).
        #[arg(long)]
        no_records: bool,
        /// Use the reduced search budget meant for large ensembles.
        #[arg(long)]
        fast: bool,
        #[command(flatten)]
        workers: Workers,
    },
    /// Evaluate an observable on every realization of a dataset by replaying its records.
    Measure {
        dataset: PathBuf,
        #[arg(long)]
        observable: Observable,
        /// Position spec such as "(i,i+x,i+2x)".
        #[arg(long)]
        positions: PositionSpec,
        /// Restrict to these separations.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<usize>>,
        /// Use the reduced search budget meant for large ensembles.
        #[arg(long)]
        fast: bool,
        #[command(flatten)]
        workers: Workers,
    },
    /// Minimal spanning graphs, parasitic scores and graph exports.
    Graphs {
        dataset: PathBuf,
        /// Target sites, e.g. 3,6,9.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "positions",
            required_unless_present = "positions"
        )]
        targets: Option<Vec<usize>>,
        /// Analyze every tuple of a position spec instead.
        #[arg(long)]
        positions: Option<PositionSpec>,
        #[arg(long, value_delimiter = ',', requires = "positions")]
        x: Option<Vec<usize>>,
        /// unrestricted or single-seed.
        #[arg(long, default_value = "unrestricted")]
        mode: SteinerMode,
        /// Export adjacency lists and layouts for this many realizations.
        #[arg(long, default_value_t = 1)]
        limit: usize,
        #[command(flatten)]
        workers: Workers,
    },
    /// Fit the aggregated series of one observable to a power law.
    Fit {
        dataset: PathBuf,
        #[arg(long)]
        observable: Observable,
        /// Drop the largest separation left after the parity filter.
        #[arg(long)]
        exclude_last: bool,
        #[arg(long, value_delimiter = ',')]
        exclude_x: Vec<usize>,
        /// all, even or odd.
        #[arg(long, default_value = "all")]
        parity: Parity,
        /// Fit against the inverse cross ratio (squared chord length).
        #[arg(long)]
        ccr: bool,
        /// Directory for the report and plot data [default: the dataset].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate {
            config,
            preset,
            n,
            p,
            seed,
            layers,
            out,
            no_records,
            fast,
            workers,
        } => load_spec(config.as_deref(), preset.as_deref(), n, seed).and_then(|mut spec| {
            if fast {
                spec.measure = MeasureOptions::ensemble();
            }
            if let Some(p) = p {
                spec.circuit.measurement_rate = p;
            }
            if let Some(l) = layers {
                spec.circuit.n_unitary_layers = l;
            }
            simulate(spec, &out, !no_records, workers.count())
        }),
        Command::Measure {
            dataset,
            observable,
            positions,
            x,
            fast,
            workers,
        } => {
            let mut req = ObservableRequest::new(observable, positions);
            req.separations = x;
            measure(&dataset, req, fast, workers.count())
        }
        Command::Graphs {
            dataset,
            targets,
            positions,
            x,
            mode,
            limit,
            workers,
        } => graphs(
            &dataset,
            targets,
            positions,
            x,
            mode,
            limit,
            workers.count(),
        ),
        Command::Fit {
            dataset,
            observable,
            exclude_last,
            exclude_x,
            parity,
            ccr,
            out,
        } => fit(
            &dataset,
            observable,
            exclude_last,
            exclude_x,
            parity,
            ccr,
            out,
        ),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_spec(
    config: Option<&Path>,
    preset_name: Option<&str>,
    n: Option<u64>,
    seed: Option<u64>,
) -> Result<EnsembleSpec> {
    let mut spec = match (config, preset_name) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            EnsembleSpec::from_toml(&text)?
        }
        (None, Some(name)) => preset(name, 1000, 1)?,
        (None, None) => {
            return Err(Error::Config(format!(
                "give --config or --preset ({})",
                PRESETS.join(", ")
            )))
        }
    };
    if let Some(n) = n {
        spec.n_realizations = n;
    }
    if let Some(s) = seed {
        spec.circuit.master_seed = s;
    }
    Ok(spec)
}

fn write_aggregated(dir: &Path) -> Result<usize> {
    let rows = read_rows(dir)?;
    let series = aggregate_all(&rows);
    write_series_csv(&dir.join(AGGREGATED_FILE), &series)?;
    Ok(rows.len())
}

/// Runs `step` under a manifest. A failed simulation also leaves the
/// partial-data marker; other commands rewrite their outputs atomically.
fn with_manifest<F>(dir: &Path, mut manifest: RunManifest, marks_data: bool, step: F) -> Result<()>
where
    F: FnOnce(&mut RunManifest) -> Result<()>,
{
    let started = Instant::now();
    manifest.save(dir)?;
    match step(&mut manifest) {
        Ok(()) => manifest.finish(dir, started, RunStatus::Complete),
        Err(e) => {
            if marks_data {
                mark_partial(dir, &e.to_string());
            }
            // Keep the first error; the manifest is best effort here.
            let _ = manifest.finish(dir, started, RunStatus::Partial);
            Err(e)
        }
    }
}

fn simulate(spec: EnsembleSpec, out: &Path, store_records: bool, threads: usize) -> Result<()> {
    spec.validate()?;
    let mut writer = DatasetWriter::create(out, store_records)?;
    let manifest = RunManifest::new(command_line(), spec.clone());
    with_manifest(out, manifest, true, |_| {
        let t = Instant::now();
        run_ensemble(&spec, threads, |o| writer.write(&o))?;
        let (n, rows) = writer.finish()?;
        write_aggregated(out)?;
        println!(
            "simulated {n} realizations ({rows} rows) in {:.1} s on {threads} threads -> {}",
            t.elapsed().as_secs_f64(),
            out.display()
        );
        Ok(())
    })
}

fn measure(dir: &Path, req: ObservableRequest, fast: bool, threads: usize) -> Result<()> {
    let mut manifest = RunManifest::load(dir)?;
    let config = manifest.config.circuit.clone();
    req.validate(&config)?;
    let groups =
        req.positions
            .enumerate(config.n_qubits, config.boundary, req.separations.as_deref())?;
    if groups.iter().all(|g| g.tuples.is_empty()) {
        println!(
            "{} fits no tuple on {} sites; nothing to do",
            req.positions, config.n_qubits
        );
        return Ok(());
    }
    let xs: Vec<usize> = groups.iter().map(|g| g.x).collect();
    let records = read_records(dir)?;
    manifest.begin(command_line());
    if fast {
        manifest.config.measure = MeasureOptions::ensemble();
    }
    let mut spec = manifest.config.clone();
    spec.observables = vec![req.clone()];
    spec.time_resolved = false;
    manifest
        .config
        .observables
        .retain(|r| !(r.observable == req.observable && r.positions == req.positions));
    manifest.config.observables.push(req.clone());
    with_manifest(dir, manifest, false, |_| {
        let t = Instant::now();
        let pool = thread_pool(threads)?;
        let mut rows = Vec::new();
        for_each_ordered(
            &pool,
            records.len() as u64,
            |k| remeasure(&spec, &records[k as usize]),
            |r| {
                rows.extend(r);
                Ok(())
            },
        )?;
        let n_new = rows.len();
        let n_spins = req.positions.n_spins();
        let total = merge_rows(
            dir,
            |r| {
                !(r.observable == req.observable
                    && r.positions.len() == n_spins
                    && xs.contains(&r.meta.x)
                    && r.meta.layer.is_none())
            },
            rows,
        )?;
        write_aggregated(dir)?;
        println!(
            "measured {} on {} realizations: {n_new} rows ({total} in the dataset) in {:.1} s",
            req.observable,
            records.len(),
            t.elapsed().as_secs_f64()
        );
        Ok(())
    })
}

fn graphs(
    dir: &Path,
    targets: Option<Vec<usize>>,
    positions: Option<PositionSpec>,
    xs: Option<Vec<usize>>,
    mode: SteinerMode,
    limit: usize,
    threads: usize,
) -> Result<()> {
    let mut manifest = RunManifest::load(dir)?;
    let config = manifest.config.circuit.clone();
    let target_sets: Vec<Vec<usize>> = match (targets, positions) {
        (Some(t), _) => vec![t],
        (None, Some(spec)) => spec
            .enumerate(config.n_qubits, config.boundary, xs.as_deref())?
            .into_iter()
            .flat_map(|g| g.tuples)
            .collect(),
        (None, None) => Vec::new(),
    };
    for t in &target_sets {
        if let Some(&bad) = t.iter().find(|&&s| s >= config.n_qubits) {
            return Err(Error::SiteOutOfRange {
                site: bad,
                n_qubits: config.n_qubits,
            });
        }
    }
    let records = read_records(dir)?;
    manifest.begin(command_line());
    let out = dir.join("graphs");
    fs::create_dir_all(&out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    with_manifest(dir, manifest, false, |_| {
        let pool = thread_pool(threads)?;
        let mut summaries: Vec<GraphSummary> = Vec::new();
        for_each_ordered(
            &pool,
            records.len() as u64,
            |k| {
                target_sets
                    .iter()
                    .map(|t| summarize_record(&records[k as usize], t, mode))
                    .collect::<Result<Vec<_>>>()
            },
            |s| {
                summaries.extend(s);
                Ok(())
            },
        )?;
        write_jsonl(&out.join("summary.jsonl"), &summaries)?;
        for rec in records.iter().take(limit) {
            let graph = build_spacetime_graph(rec);
            let k = rec.realization;
            let mut adj = Vec::new();
            write_adjacency_list(&graph, &mut adj).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            write_file(&out.join(format!("r{k}.adj")), &adj)?;
            if let Some(t) = target_sets.first() {
                let g_min = minimal_spanning_graph(&graph, t, mode)?;
                let parasitic = if g_min.connected {
                    parasitic_edges(&graph, &g_min, &complement_sites(graph.n_sites(), t))?
                } else {
                    Vec::new()
                };
                let mut csv = Vec::new();
                write_layout_csv(&graph, Some(&g_min), &parasitic, &mut csv).map_err(|e| {
                    Error::Io {
                        path: out.clone(),
                        source: e,
                    }
                })?;
                let name = t
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join("-");
                write_file(&out.join(format!("r{k}_t{name}.csv")), &csv)?;
            }
        }
        let n = summaries.len().max(1) as f64;
        let connected: Vec<&GraphSummary> = summaries.iter().filter(|s| s.connected).collect();
        let mean_par = connected
            .iter()
            .filter_map(|s| s.parasitic_score)
            .sum::<usize>() as f64
            / connected.len().max(1) as f64;
        println!(
            "{} graphs ({} mode): {:.3} connected, mean G_min edges {:.2}, mean parasitic score {:.2} (connected only)",
            summaries.len(),
            match mode {
                SteinerMode::Unrestricted => "unrestricted",
                SteinerMode::SingleSeed => "single-seed",
            },
            connected.len() as f64 / n,
            summaries.iter().map(|s| s.edge_count).sum::<usize>() as f64 / n,
            mean_par
        );
        Ok(())
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn fit(
    dir: &Path,
    observable: Observable,
    exclude_last: bool,
    exclude_x: Vec<usize>,
    parity: Parity,
    ccr: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    // A bare aggregated CSV can be fitted too; the ring size then is unknown.
    let manifest = if dir.join(MANIFEST_FILE).exists() {
        Some(RunManifest::load(dir)?)
    } else {
        None
    };
    let n_sites = manifest.as_ref().map(|m| m.config.circuit.n_qubits);
    if ccr {
        match &manifest {
            None => {
                return Err(Error::Config(
                    "--ccr needs the dataset manifest for the ring size".into(),
                ))
            }
            Some(m) if m.config.circuit.boundary != Boundary::Periodic => {
                log::warn!("cross ratios assume a ring; the dataset has open boundaries")
            }
            Some(_) => {}
        }
    }
    let series: Vec<_> = read_series_csv(&dir.join(AGGREGATED_FILE))?
        .into_iter()
        .filter(|p| p.observable == observable && p.layer.is_none())
        .collect();
    let options = FitOptions {
        exclude_last,
        exclude_x,
        parity,
        domain: if ccr {
            FitDomain::InverseCrossRatio
        } else {
            FitDomain::Separation
        },
        n_sites,
    };
    let out = out.unwrap_or_else(|| dir.to_path_buf());
    fs::create_dir_all(&out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let stem = format!("{}{}", observable, if ccr { "_ccr" } else { "" });
    let step = || -> Result<()> {
        let result = fit_power_law(&series, &options)?;
        let json = serde_json::to_string_pretty(&result).expect("fit results serialize");
        write_file(
            &out.join(format!("fit_{stem}.json")),
            format!("{json}\n").as_bytes(),
        )?;
        write_file(
            &out.join(format!("series_{stem}.dat")),
            series_plot_data(&series, &options)?.as_bytes(),
        )?;
        write_file(
            &out.join(format!("fitline_{stem}.dat")),
            fit_plot_data(&result).as_bytes(),
        )?;
        println!(
            "{observable}: alpha = {:.4} +- {:.4} from x = {:?}",
            result.alpha,
            result.alpha_err,
            result.used.iter().map(|p| p.x).collect::<Vec<_>>()
        );
        Ok(())
    };
    match manifest {
        Some(mut m) => {
            m.begin(command_line());
            with_manifest(dir, m, false, |_| step())
        }
        None => step(),
    }
}
