//! Moments of Haar two-qubit gates: entangling power and matrix elements.

use gme_circuits::density::partial_trace;
use gme_circuits::state::{sample_haar_unitary, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gme_circuits::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 20_000;
    let (mut purity, mut corner) = (0.0, 0.0);
    for _ in 0..n {
        let u = sample_haar_unitary(&mut rng);
        let mut psi = StateVector::zero(2)?;
        psi.apply_two_qubit_gate(&u, 0, 1)?;
        purity += partial_trace(&psi, &[0])?.purity();
        corner += u.matrix()[0][1].norm_sqr();
    }
    // Haar averages: purity 4/5, |U_ij|^2 1/4.
    println!(
        "mean single-qubit purity after one gate: {:.4}",
        purity / n as f64
    );
    println!("mean |U_01|^2: {:.4}", corner / n as f64);
    Ok(())
}
