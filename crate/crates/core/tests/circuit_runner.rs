mod common;

use std::collections::BTreeMap;
use std::io::BufRead;

use gme_circuits::circuit::{replay, run_realization, Boundary, CircuitConfig};
use gme_circuits::dataset::{DatasetWriter, ROWS_FILE};
use gme_circuits::ensemble::{
    run_ensemble, EnsembleSpec, MeasureOptions, Observable, ObservableRequest, Row,
};
use gme_circuits::optimize::OptimizerConfig;
use gme_circuits::positions::PositionSpec;
use gme_circuits::scaling::aggregate_all;
use proptest::prelude::*;

fn light() -> MeasureOptions {
    MeasureOptions::uniform(OptimizerConfig {
        n_restarts: 2,
        max_iterations: 300,
        ..OptimizerConfig::default()
    })
}

fn collect(spec: &EnsembleSpec, threads: usize) -> Vec<Row> {
    let mut rows = Vec::new();
    run_ensemble(spec, threads, |out| {
        rows.extend(out.rows);
        Ok(())
    })
    .unwrap();
    rows
}

#[test]
fn replay_rebuilds_the_final_state() {
    let cfg = CircuitConfig::new(9, Boundary::Periodic, 0.25, 4).with_layers(12);
    for k in 0..5 {
        let run = run_realization(&cfg, k).unwrap();
        let again = replay(&run.record).unwrap();
        let err = run
            .state
            .amplitudes()
            .iter()
            .zip(again.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}

#[test]
fn realizations_are_reproducible_and_distinct() {
    let cfg = CircuitConfig::new(6, Boundary::Open, 0.3, 8).with_layers(6);
    let a = run_realization(&cfg, 3).unwrap().record;
    let b = run_realization(&cfg, 3).unwrap().record;
    let c = run_realization(&cfg, 4).unwrap().record;
    assert_eq!(a, b);
    assert_ne!(a.gates[0].gate_seed, c.gates[0].gate_seed);
    let other_seed = CircuitConfig {
        master_seed: 9,
        ..cfg
    };
    assert_ne!(
        a.gates[0].gate_seed,
        run_realization(&other_seed, 3).unwrap().record.gates[0].gate_seed
    );
}

#[test]
fn gate_seeds_are_uniform() {
    // Chi-square of the low nibble of every gate seed over 16 bins.
    let cfg = CircuitConfig::new(6, Boundary::Open, 0.0, 21).with_layers(4);
    let mut counts = [0usize; 16];
    for k in 0..800 {
        for g in run_realization(&cfg, k).unwrap().record.gates {
            counts[(g.gate_seed & 15) as usize] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let expected = total as f64 / 16.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 15 degrees of freedom, p = 0.001.
    assert!(chi2 < 37.7, "chi2 = {chi2}");
}

#[test]
fn measurement_count_is_binomial() {
    let (l, layers, p, n) = (10usize, 20usize, 0.2, 200u64);
    let cfg = CircuitConfig::new(l, Boundary::Open, p, 5).with_layers(layers);
    let count: usize = (0..n)
        .map(|k| run_realization(&cfg, k).unwrap().record.measurements.len())
        .sum();
    let trials = (n as usize * l * layers) as f64;
    let sigma = (trials * p * (1.0 - p)).sqrt();
    assert!(
        (count as f64 - trials * p).abs() < 5.0 * sigma,
        "{count} vs {}",
        trials * p
    );
}

#[test]
fn extreme_rates() {
    let none = run_realization(
        &CircuitConfig::new(6, Boundary::Open, 0.0, 1).with_layers(8),
        0,
    )
    .unwrap();
    assert!(none.record.measurements.is_empty());
    let all = run_realization(
        &CircuitConfig::new(6, Boundary::Open, 1.0, 1).with_layers(8),
        0,
    )
    .unwrap();
    assert_eq!(all.record.measurements.len(), 6 * 8);
    assert!(all
        .record
        .measurement_table()
        .iter()
        .all(|row| row.iter().all(|&m| m)));
}

#[test]
fn periodic_chain_is_translation_covariant() {
    // Ensemble mean of E on (i, i+2) must not depend on i.
    let cfg = CircuitConfig::new(8, Boundary::Periodic, 0.15, 31).with_layers(16);
    let spec = EnsembleSpec::new(cfg, 300)
        .observe(ObservableRequest::new(Observable::E, PositionSpec::pair()).at(&[2]));
    let rows = collect(&spec, 2);
    let mut by_base: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        by_base.entry(r.positions[0]).or_default().push(r.value);
    }
    assert_eq!(by_base.len(), 8);
    let all: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (mean, _) = common::mean_stderr(&all);
    for (i, v) in by_base {
        let (m, se) = common::mean_stderr(&v);
        assert!(
            (m - mean).abs() < 5.0 * se.max(1e-3),
            "base {i}: {m} vs {mean} +- {se}"
        );
    }
}

#[test]
fn row_count_for_open_chain_triples() {
    let cfg = CircuitConfig::new(14, Boundary::Open, 0.3, 2);
    let mut spec = EnsembleSpec::new(cfg, 2).observe(ObservableRequest::new(
        Observable::W,
        PositionSpec::triple(),
    ));
    spec.measure = MeasureOptions::ensemble();
    let rows = collect(&spec, 2);
    // 12 + 10 + 8 + 6 + 4 + 2 tuples per realization.
    assert_eq!(rows.len(), 2 * 42);
    let max_x = rows.iter().map(|r| r.meta.x).max().unwrap();
    assert_eq!(max_x, 6);
}

#[test]
fn aggregation_matches_independent_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CircuitConfig::new(8, Boundary::Open, 0.2, 17).with_layers(10);
    let mut spec = EnsembleSpec::new(cfg, 12)
        .observe(ObservableRequest::new(Observable::E, PositionSpec::pair()).at(&[1, 3]))
        .observe(ObservableRequest::new(Observable::W, PositionSpec::triple()).at(&[1, 2]));
    spec.measure = light();
    let mut writer = DatasetWriter::create(dir.path(), false).unwrap();
    let mut rows = Vec::new();
    run_ensemble(&spec, 3, |out| {
        writer.write(&out)?;
        rows.extend(out.rows);
        Ok(())
    })
    .unwrap();
    writer.finish().unwrap();
    let series = aggregate_all(&rows);

    // One pass over the raw JSON lines.
    let mut sums: BTreeMap<(String, u64), (f64, f64, usize, usize)> = BTreeMap::new();
    let file = std::fs::File::open(dir.path().join(ROWS_FILE)).unwrap();
    for line in std::io::BufReader::new(file).lines() {
        let v: serde_json::Value = serde_json::from_str(&line.unwrap()).unwrap();
        let key = (
            v["observable"].as_str().unwrap().to_string(),
            v["meta"]["x"].as_u64().unwrap(),
        );
        let value = v["value"].as_f64().unwrap();
        let e = sums.entry(key).or_default();
        e.0 += value;
        e.1 += value * value;
        e.2 += 1;
        e.3 += usize::from(value > 0.0);
    }
    assert_eq!(sums.len(), series.len());
    for p in &series {
        let (s, s2, n, pos) = sums[&(p.observable.to_string(), p.x as u64)];
        let nf = n as f64;
        let mean = s / nf;
        let var = (s2 - nf * mean * mean) / (nf - 1.0);
        assert_eq!(p.n_total, n);
        assert_eq!(p.n_positive, pos);
        assert!((p.mean - mean).abs() < 1e-12);
        assert!((p.stderr - (var.max(0.0) / nf).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn rows_do_not_depend_on_parallelism() {
    let cfg = CircuitConfig::new(7, Boundary::Periodic, 0.2, 3).with_layers(8);
    let mut spec = EnsembleSpec::new(cfg, 10)
        .observe(ObservableRequest::new(Observable::W, PositionSpec::triple()).at(&[1, 2]));
    spec.measure = light();
    assert_eq!(collect(&spec, 1), collect(&spec, 4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tuple_enumeration_counts(l in 3usize..30, k in 2usize..5, periodic in any::<bool>()) {
        let spec = PositionSpec::new((0..k).collect()).unwrap();
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let groups = spec.enumerate(l, boundary, None).unwrap();
        for g in &groups {
            let want = if periodic { l } else { l - (k - 1) * g.x };
            prop_assert_eq!(g.tuples.len(), want);
            for t in &g.tuples {
                prop_assert!(t.iter().all(|&s| s < l));
                let mut sorted = t.clone();
                sorted.sort_unstable();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), k);
            }
        }
        // Separations run 1..=max without gaps.
        let xs: Vec<usize> = groups.iter().map(|g| g.x).collect();
        prop_assert_eq!(xs, (1..=spec.max_separation(l, boundary)).collect::<Vec<_>>());
    }

    #[test]
    fn aggregation_ignores_row_order(values in proptest::collection::vec(0.0f64..2.0, 2..40), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let rows: Vec<Row> = values.iter().enumerate().map(|(k, &v)| Row {
            realization: k as u64,
            observable: Observable::E,
            positions: vec![0, 1],
            value: v,
            meta: serde_json::from_str(r#"{"x": 1}"#).unwrap(),
        }).collect();
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(aggregate_all(&rows), aggregate_all(&shuffled));
    }
}
