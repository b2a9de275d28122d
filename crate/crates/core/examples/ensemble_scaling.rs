//! A small critical ensemble on a ring: negativity of pairs versus
//! separation and a power-law fit of the decay.
//!
//! Larger runs belong to the `gme-circuits` binary, which streams rows to
//! disk and can resume.

use std::collections::BTreeMap;

use gme_circuits::circuit::{Boundary, CircuitConfig};
use gme_circuits::ensemble::{
    run_ensemble, EnsembleSpec, MeasureOptions, Observable, ObservableRequest, CRITICAL_RATE,
};
use gme_circuits::positions::PositionSpec;
use gme_circuits::scaling::{fit_power_law, series_csv, summarize, FitOptions};

fn main() -> gme_circuits::Result<()> {
    let circuit = CircuitConfig::new(12, Boundary::Periodic, CRITICAL_RATE, 3).with_layers(24);
    let mut spec = EnsembleSpec::new(circuit, 200)
        .observe(ObservableRequest::new(Observable::E, PositionSpec::pair()));
    spec.measure = MeasureOptions::ensemble();

    let mut values: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    run_ensemble(&spec, 1, |out| {
        for row in out.rows {
            values.entry(row.meta.x).or_default().push(row.value);
        }
        Ok(())
    })?;
    let series = values
        .iter_mut()
        .map(|(&x, v)| summarize(Observable::E, x, None, v))
        .collect::<gme_circuits::Result<Vec<_>>>()?;
    print!("{}", series_csv(&series));

    let fit = fit_power_law(
        &series,
        &FitOptions {
            exclude_last: true,
            ..FitOptions::default()
        },
    )?;
    println!(
        "E ~ x^-alpha with alpha = {:.2} +- {:.2}",
        fit.alpha, fit.alpha_err
    );
    Ok(())
}
