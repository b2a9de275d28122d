//! One monitored circuit: the event log, the final state and three-party
//! entanglement of its triples.

use gme_circuits::circuit::{replay, run_realization, Boundary, CircuitConfig};
use gme_circuits::density::partial_trace;
use gme_circuits::measures::w_criterion;
use gme_circuits::optimize::OptimizerConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gme_circuits::Result<()> {
    let config = CircuitConfig::new(10, Boundary::Open, 0.2, 7).with_layers(20);
    let run = run_realization(&config, 0)?;
    let record = &run.record;
    println!(
        "{} gates, {} measurements over {} steps",
        record.gates.len(),
        record.measurements.len(),
        config.n_steps()
    );
    for (step, row) in record.measurement_table().iter().enumerate().take(6) {
        let line: String = row.iter().map(|&m| if m { 'x' } else { '.' }).collect();
        println!("step {step:>2} {line}");
    }

    // The log alone reproduces the state.
    let again = replay(record)?;
    assert_eq!(again.amplitudes(), run.state.amplitudes());

    // Three-party entanglement is rare; scan realizations until a triple
    // of neighbours carries some.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opt = OptimizerConfig::default();
    for k in 0..50 {
        let state = run_realization(&config, k)?.state;
        let mut line = String::new();
        let mut any = false;
        for i in 0..config.n_qubits - 2 {
            let w = w_criterion(&partial_trace(&state, &[i, i + 1, i + 2])?, &opt, &mut rng)?;
            any |= w.detected();
            line.push_str(&format!(" {:.4}", w.value));
        }
        if any {
            println!("realization {k}, W of (i,i+1,i+2):{line}");
            break;
        }
    }
    Ok(())
}
