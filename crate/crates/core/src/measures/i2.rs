//! Two-copy criterion `I2` for three or four parties.
//!
//! With `|Phi> = |Phi_1> ⊗ |Phi_2>` a product over all `2m` spins of the two
//! copies, `<Phi| rho⊗rho Pi |Phi> = |<Phi_1|rho|Phi_2>|^2`, and the partial
//! swap of party set `S` turns the subtracted terms into products of two
//! diagonal expectation values. So the whole criterion is evaluated from
//! `2^m`-dimensional quadratic forms and the doubled space is never built:
//!
//! ```text
//! I2 = |<Phi_1|rho|Phi_2>| - sum_S sqrt(<Phi_1^S|rho|Phi_1^S> <Phi_2^S|rho|Phi_2^S>)
//! ```
//!
//! where `Phi_1^S` takes the copy-2 factors on `S`. `S` runs over one side of
//! every bipartition (`2^{m-1} - 1` of them: `1|23, 12|3, 13|2` for three
//! parties).

use std::f64::consts::PI;

use rand::Rng;

use super::{norm_sqr, overlap, qubit_state, splits_across_cut, Factor, GmeResult};
use crate::density::ReducedDensityMatrix;
use crate::error::{Error, Result};
use crate::optimize::{maximize_multistart, OptimizerConfig};
use crate::state::C64;

/// Party sets `S` containing party 0, one per bipartition.
pub(crate) fn bipartition_sides(m: usize) -> Vec<usize> {
    let full = (1usize << m) - 1;
    (1..full).filter(|s| s & 1 == 1).collect()
}

fn product_vector(factors: &[[C64; 2]], out: &mut [C64]) {
    let m = factors.len();
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut acc = C64::new(1.0, 0.0);
        for (k, f) in factors.iter().enumerate() {
            acc *= f[(idx >> (m - 1 - k)) & 1];
        }
        *slot = acc;
    }
}

fn value_at(rho: &Factor, m: usize, params: &[f64]) -> f64 {
    let d = 1usize << m;
    let r = rho.rank();
    let states: Vec<[C64; 2]> = (0..2 * m)
        .map(|k| qubit_state(params[2 * k], params[2 * k + 1]))
        .collect();
    let (copy1, copy2) = states.split_at(m);
    let mut v = [C64::new(0.0, 0.0); 16];
    let mut q1 = [C64::new(0.0, 0.0); 16];
    let mut q2 = [C64::new(0.0, 0.0); 16];
    product_vector(copy1, &mut v[..d]);
    rho.project_ket(&v[..d], &mut q1);
    product_vector(copy2, &mut v[..d]);
    rho.project_ket(&v[..d], &mut q2);
    let mut value = overlap(&q1[..r], &q2[..r]).norm();

    let mut f1 = [[C64::new(0.0, 0.0); 2]; 4];
    let mut f2 = [[C64::new(0.0, 0.0); 2]; 4];
    for s in bipartition_sides(m) {
        for k in 0..m {
            let swapped = (s >> k) & 1 == 1;
            f1[k] = if swapped { copy2[k] } else { copy1[k] };
            f2[k] = if swapped { copy1[k] } else { copy2[k] };
        }
        product_vector(&f1[..m], &mut v[..d]);
        rho.project_ket(&v[..d], &mut q1);
        product_vector(&f2[..m], &mut v[..d]);
        rho.project_ket(&v[..d], &mut q2);
        value -= (norm_sqr(&q1[..r]) * norm_sqr(&q2[..r])).sqrt();
    }
    value
}

/// Objective for `m` parties at `params = [theta_1, phi_1, ..., theta_2m, phi_2m]`;
/// spins `0..m` form copy 1 and `m..2m` copy 2. Party bit `0` of a set mask
/// refers to the first spin.
pub fn i2_value_at(rho: &ReducedDensityMatrix, params: &[f64]) -> Result<f64> {
    let m = check(rho)?;
    if params.len() != 4 * m {
        return Err(Error::OutOfRange(format!(
            "I2 on {m} spins takes {} angles",
            4 * m
        )));
    }
    Ok(value_at(&Factor::new(rho), m, params))
}

fn check(rho: &ReducedDensityMatrix) -> Result<usize> {
    let m = rho.n_spins();
    if !(3..=4).contains(&m) {
        return Err(Error::WrongSpinCount {
            criterion: "I2",
            expected: "3 or 4",
            actual: m,
        });
    }
    Ok(m)
}

/// Certified bound `l_max - n_cuts * l_min`: by Cauchy-Schwarz the first
/// term is at most `l_max`, and each subtracted term is at least `l_min`.
pub(crate) fn spectral_bound(rho: &ReducedDensityMatrix) -> f64 {
    let ev = rho.eigenvalues();
    let n_cuts = bipartition_sides(rho.n_spins()).len() as f64;
    ev[ev.len() - 1] - n_cuts * ev[0].max(0.0)
}

/// Maximizes `I2` over product states of the doubled system.
///
/// The deterministic start `|0...0>|1...1>` reproduces the unrotated `W`
/// expression for three spins.
pub fn i2_criterion<R: Rng + ?Sized>(
    rho: &ReducedDensityMatrix,
    opt: &OptimizerConfig,
    rng: &mut R,
) -> Result<GmeResult> {
    let m = check(rho)?;
    opt.validate()?;
    if opt.spectral_screen {
        let bound = spectral_bound(rho);
        if bound <= 0.0 {
            return Ok(GmeResult::screened(bound));
        }
    }
    if opt.spectral_screen && splits_across_cut(rho) {
        return Ok(GmeResult::screened(0.0));
    }
    let factor = Factor::new(rho);
    let n_params = 4 * m;
    let mut starts = Vec::new();
    if opt.include_identity_start {
        let mut x = vec![0.0; n_params];
        for k in m..2 * m {
            x[2 * k] = PI;
        }
        starts.push(x);
    }
    let random_start = |r: &mut R| {
        (0..2 * m)
            .flat_map(|_| {
                // Uniform on the Bloch sphere.
                let theta = (1.0 - 2.0 * r.gen::<f64>()).acos();
                [theta, r.gen_range(0.0..2.0 * PI)]
            })
            .collect()
    };
    let out = maximize_multistart(
        |x: &[f64]| value_at(&factor, m, x),
        &starts,
        random_start,
        0.6,
        opt,
        rng,
    );
    Ok(GmeResult::from_search(
        out.value,
        out.n_runs,
        out.n_iterations,
        out.converged,
        out.x,
    ))
}
