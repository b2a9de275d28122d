//! Random states, including samplers for the biseparable sets the criteria
//! must never flag.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::density::ReducedDensityMatrix;
use crate::state::C64;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state of `m` spins as a density matrix.
pub fn random_pure_density<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ReducedDensityMatrix {
    random_density_matrix(m, 1, rng)
}

/// Induced-measure random state `G G^dag / Tr` with `G` a `2^m x rank` Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(
    m: usize,
    rank: usize,
    rng: &mut R,
) -> ReducedDensityMatrix {
    let d = 1usize << m;
    let rank = rank.clamp(1, d);
    let g = DMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let rho = &g * g.adjoint();
    let tr: f64 = (0..d).map(|k| rho[(k, k)].re).sum();
    let rho = rho.map(|z| z / tr);
    ReducedDensityMatrix::from_parts((0..m).collect(), rho).expect("shape is consistent")
}

fn random_factor<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ReducedDensityMatrix {
    // Half pure (extremal, hardest for the criteria), half mixed.
    if rng.gen_bool(0.5) {
        random_pure_density(m, rng)
    } else {
        let rank = rng.gen_range(2..=(1usize << m));
        random_density_matrix(m, rank, rng)
    }
}

/// Product of states on the spin set `left` (mask bit k = spin k) and its
/// complement, reordered to the canonical spin order.
fn bipartite_product<R: Rng + ?Sized>(m: usize, left: usize, rng: &mut R) -> ReducedDensityMatrix {
    let a: Vec<usize> = (0..m).filter(|k| (left >> k) & 1 == 1).collect();
    let b: Vec<usize> = (0..m).filter(|k| (left >> k) & 1 == 0).collect();
    let rho = random_factor(a.len(), rng).kron(&random_factor(b.len(), rng));
    let order: Vec<usize> = a.iter().chain(&b).copied().collect();
    // Result spin k is the factor position that carries label k.
    let perm: Vec<usize> = (0..m)
        .map(|k| {
            order
                .iter()
                .position(|&s| s == k)
                .expect("all labels present")
        })
        .collect();
    rho.permute_spins(&perm)
        .and_then(|r| r.relabel((0..m).collect()))
        .expect("valid permutation")
}

fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn sample_biseparable<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ReducedDensityMatrix {
    // One side of every bipartition: sets containing spin 0.
    let cuts: Vec<usize> = (1..(1usize << m) - 1).filter(|s| s & 1 == 1).collect();
    let n_terms = if rng.gen_bool(0.3) {
        1
    } else {
        rng.gen_range(2..=4)
    };
    let weights = random_weights(n_terms, rng);
    let terms: Vec<ReducedDensityMatrix> = (0..n_terms)
        .map(|_| {
            let cut = cuts[rng.gen_range(0..cuts.len())];
            bipartite_product(m, cut, rng)
        })
        .collect();
    let parts: Vec<(f64, &ReducedDensityMatrix)> =
        weights.iter().copied().zip(terms.iter()).collect();
    ReducedDensityMatrix::mixture(&parts).expect("non-empty mixture")
}

/// Random mixture of the three-spin forms `rho_1⊗rho_23`, `rho_13⊗rho_2`,
/// `rho_12⊗rho_3` with random weights; factors are pure half of the time.
pub fn sample_biseparable_3<R: Rng + ?Sized>(rng: &mut R) -> ReducedDensityMatrix {
    sample_biseparable(3, rng)
}

/// Random mixture of four-spin states that are products across one of the
/// seven bipartitions (`1|234`-type and `12|34`-type).
pub fn sample_biseparable_4<R: Rng + ?Sized>(rng: &mut R) -> ReducedDensityMatrix {
    sample_biseparable(4, rng)
}
