//! Every entanglement criterion on a handful of textbook states.
//!
//! Run with `cargo run --release --example canonical_states`.

use gme_circuits::density::{log_negativity, ReducedDensityMatrix};
use gme_circuits::measures::{
    geometric_entanglement, i2_criterion, w4_criterion, w_criterion, DEFAULT_MAX_TERMS,
};
use gme_circuits::optimize::OptimizerConfig;
use gme_circuits::state::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn superposition(terms: &[&str]) -> ReducedDensityMatrix {
    let n = terms[0].len();
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    for t in terms {
        amps[usize::from_str_radix(t, 2).unwrap()] =
            C64::new(1.0 / (terms.len() as f64).sqrt(), 0.0);
    }
    ReducedDensityMatrix::from_pure(&amps).unwrap()
}

fn main() -> gme_circuits::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let opt = OptimizerConfig::default();

    let bell = superposition(&["00", "11"]);
    println!("Bell pair        E  = {:.6}", log_negativity(&bell, &[0]));

    let states = [
        ("GHZ", superposition(&["000", "111"])),
        ("W", superposition(&["001", "010", "100"])),
        ("|010>", superposition(&["010"])),
        ("Bell x |0>", superposition(&["000", "110"])),
        ("mixed", ReducedDensityMatrix::maximally_mixed(3)?),
    ];
    println!(
        "{:<12} {:>9} {:>9} {:>9} {:>9}",
        "state", "E(0|12)", "W", "I2", "D"
    );
    for (name, rho) in &states {
        let w = w_criterion(rho, &opt, &mut rng)?;
        let i2 = i2_criterion(rho, &OptimizerConfig::with_restarts(50), &mut rng)?;
        let d = geometric_entanglement(rho, DEFAULT_MAX_TERMS, &opt, &mut rng)?;
        println!(
            "{name:<12} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            log_negativity(rho, &[0]),
            w.value,
            i2.value,
            d.result.value
        );
    }

    let w4 = superposition(&["0001", "0010", "0100", "1000"]);
    let split = superposition(&["0000", "0011"]);
    for (name, rho) in [("W4", &w4), ("|00>(|00>+|11>)", &split)] {
        let v = w4_criterion(rho, &OptimizerConfig::with_restarts(50), &mut rng)?;
        println!("{name:<16} W4 = {:.6}", v.value);
    }
    Ok(())
}
