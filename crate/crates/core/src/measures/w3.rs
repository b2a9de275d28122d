//! Three-spin GHZ-type biseparability criterion `W`.
//!
//! For the rotated matrix `rho' = U rho U^dag`, `U = U1 ⊗ U2 ⊗ U3`,
//!
//! ```text
//! W = |rho'_18| - sqrt(rho'_22 rho'_77) - sqrt(rho'_33 rho'_66) - sqrt(rho'_44 rho'_55)
//! ```
//!
//! (one-based indices, basis `|000>, |001>, ..., |111>`), maximized over the
//! local unitaries. Each `U_k` is `Rz(alpha) Ry(theta) Rz(phi)`; the outer
//! `Rz(alpha)` only rephases `rho'_18` and leaves the diagonal alone, so the
//! search runs over the six angles `(theta_k, phi_k)`.

use std::f64::consts::PI;

use rand::Rng;

use super::{kron_rows, norm_sqr, overlap, rotation, splits_across_cut, Factor, GmeResult};
use crate::density::ReducedDensityMatrix;
use crate::error::{Error, Result};
use crate::optimize::{maximize_multistart, OptimizerConfig};
use crate::state::C64;

const N_PARAMS: usize = 6;

fn value_at(rho: &Factor, params: &[f64]) -> f64 {
    let ops = [
        rotation(params[0], params[1]),
        rotation(params[2], params[3]),
        rotation(params[4], params[5]),
    ];
    let mut rows = [C64::new(0.0, 0.0); 64];
    kron_rows(&ops, &mut rows);
    let mut proj = [[C64::new(0.0, 0.0); 8]; 8];
    let r = rho.rank();
    for (a, p) in proj.iter_mut().enumerate() {
        rho.project_row(&rows[a * 8..(a + 1) * 8], p);
    }
    let diag = |a: usize| norm_sqr(&proj[a][..r]);
    let corner = overlap(&proj[0][..r], &proj[7][..r]).norm();
    corner - (diag(1) * diag(6)).sqrt() - (diag(2) * diag(5)).sqrt() - (diag(3) * diag(4)).sqrt()
}

/// Objective at the rotation encoded by `params = [theta_1, phi_1, ..., phi_3]`.
pub fn w_value_at_rotation(rho: &ReducedDensityMatrix, params: &[f64]) -> Result<f64> {
    check(rho)?;
    Ok(value_at(&Factor::new(rho), params))
}

/// The expression evaluated on `rho` as given (no rotation).
pub fn w_value_of_matrix(rho: &ReducedDensityMatrix) -> Result<f64> {
    w_value_at_rotation(rho, &[0.0; N_PARAMS])
}

fn check(rho: &ReducedDensityMatrix) -> Result<()> {
    if rho.n_spins() != 3 {
        return Err(Error::WrongSpinCount {
            criterion: "W",
            expected: "3",
            actual: rho.n_spins(),
        });
    }
    Ok(())
}

/// Certified upper bound `(l_max - l_min)/2 - 3 l_min` on the criterion.
///
/// `|rho'_18|` is an off-diagonal element between orthonormal vectors, hence
/// at most half the spectral width, and every diagonal entry is at least
/// `l_min`.
pub(crate) fn spectral_bound(rho: &ReducedDensityMatrix) -> f64 {
    let ev = rho.eigenvalues();
    let (lmin, lmax) = (ev[0].max(0.0), ev[ev.len() - 1]);
    0.5 * (lmax - lmin) - 3.0 * lmin
}

/// Maximizes `W` over local unitaries; the identity rotation is the first
/// start when `opt.include_identity_start` is set.
pub fn w_criterion<R: Rng + ?Sized>(
    rho: &ReducedDensityMatrix,
    opt: &OptimizerConfig,
    rng: &mut R,
) -> Result<GmeResult> {
    check(rho)?;
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
    let mut starts = Vec::new();
    if opt.include_identity_start {
        starts.push(vec![0.0; N_PARAMS]);
    }
    let random_start = |r: &mut R| (0..N_PARAMS).map(|_| r.gen_range(0.0..2.0 * PI)).collect();
    let out = maximize_multistart(
        |x: &[f64]| value_at(&factor, x),
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
