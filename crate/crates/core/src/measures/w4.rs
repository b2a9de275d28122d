//! Four-spin W-type criterion, maximized over local filters.
//!
//! In one-based indices of the basis `|0000>, |0001>, ..., |1111>`:
//!
//! ```text
//! W4 = |r23| + |r25| + |r29| + |r35| + |r39| + |r59|
//!      - r22 - r33 - r55 - r99
//!      - sqrt(r11 r44) - sqrt(r11 r66) - sqrt(r11 r77)
//!      - sqrt(r11 r10,10) - sqrt(r11 r11,11) - sqrt(r11 r13,13)
//! ```
//!
//! evaluated on `F rho F^dag / Tr(F rho F^dag)` with `F = F1 ⊗ F2 ⊗ F3 ⊗ F4`.
//! Each filter is an arbitrary complex 2x2 matrix scaled to unit Frobenius
//! norm; the trace renormalization removes the remaining overall scale.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{kron_rows, norm_sqr, overlap, splits_across_cut, Factor, GmeResult};
use crate::density::{Op2, ReducedDensityMatrix};
use crate::error::{Error, Result};
use crate::optimize::{maximize_multistart, OptimizerConfig};
use crate::state::C64;

/// Filtered traces below this mean the filter annihilated the state.
pub const MIN_FILTERED_TRACE: f64 = 1e-12;

const N_PARAMS: usize = 32;

// Zero-based: single excitations |0001>, |0010>, |0100>, |1000>.
const SINGLES: [usize; 4] = [1, 2, 4, 8];
// Double excitations paired with |0000> in the square-root terms.
const DOUBLES: [usize; 6] = [3, 5, 6, 9, 10, 12];

fn filters_from_params(params: &[f64]) -> [Op2; 4] {
    let mut ops = [[[C64::new(0.0, 0.0); 2]; 2]; 4];
    for (k, op) in ops.iter_mut().enumerate() {
        let p = &params[8 * k..8 * k + 8];
        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        *op = [
            [C64::new(p[0], p[1]) / norm, C64::new(p[2], p[3]) / norm],
            [C64::new(p[4], p[5]) / norm, C64::new(p[6], p[7]) / norm],
        ];
    }
    ops
}

/// The expression on an (unnormalized) matrix given as row-major entries.
fn expression(entry: impl Fn(usize, usize) -> C64) -> f64 {
    let mut v = 0.0;
    for (a, &i) in SINGLES.iter().enumerate() {
        for &j in &SINGLES[a + 1..] {
            v += entry(i, j).norm();
        }
        v -= entry(i, i).re;
    }
    let r00 = entry(0, 0).re.max(0.0);
    for &j in &DOUBLES {
        v -= (r00 * entry(j, j).re.max(0.0)).sqrt();
    }
    v
}

/// The expression on `rho` as given (identity filters).
pub fn w4_value_of_matrix(rho: &ReducedDensityMatrix) -> Result<f64> {
    check(rho)?;
    Ok(expression(|r, c| rho.get(r, c)) / rho.trace())
}

fn value_with_filters(rho: &Factor, filters: &[Op2; 4]) -> Option<f64> {
    let mut rows = [C64::new(0.0, 0.0); 256];
    kron_rows(filters, &mut rows);
    let r = rho.rank();
    let mut proj = [[C64::new(0.0, 0.0); 16]; 16];
    for (a, p) in proj.iter_mut().enumerate() {
        rho.project_row(&rows[a * 16..(a + 1) * 16], p);
    }
    // Tr(F rho F^dag) = sum_a (F rho F^dag)_aa.
    let mut trace = 0.0;
    let mut diag = [0.0f64; 16];
    for (d, p) in diag.iter_mut().zip(&proj) {
        *d = norm_sqr(&p[..r]);
        trace += *d;
    }
    if !(trace > MIN_FILTERED_TRACE) {
        return None;
    }
    let entry = |a: usize, b: usize| {
        if a == b {
            C64::new(diag[a], 0.0)
        } else {
            overlap(&proj[a][..r], &proj[b][..r])
        }
    };
    Some(expression(entry) / trace)
}

/// Objective at explicit filters; `None` when the filtered trace vanishes.
pub fn w4_value_with_filters(
    rho: &ReducedDensityMatrix,
    filters: &[Op2; 4],
) -> Result<Option<f64>> {
    check(rho)?;
    Ok(value_with_filters(&Factor::new(rho), filters))
}

fn check(rho: &ReducedDensityMatrix) -> Result<()> {
    if rho.n_spins() != 4 {
        return Err(Error::WrongSpinCount {
            criterion: "W4",
            expected: "4",
            actual: rho.n_spins(),
        });
    }
    Ok(())
}

/// Maximizes `W4` over local filters. The identity filter is the
/// deterministic start; points where the filter kills the state score
/// `-inf`, so the simplex moves away from them.
pub fn w4_criterion<R: Rng + ?Sized>(
    rho: &ReducedDensityMatrix,
    opt: &OptimizerConfig,
    rng: &mut R,
) -> Result<GmeResult> {
    check(rho)?;
    opt.validate()?;
    if opt.spectral_screen && splits_across_cut(rho) {
        return Ok(GmeResult::screened(0.0));
    }
    let factor = Factor::new(rho);
    let mut starts = Vec::new();
    if opt.include_identity_start {
        let mut x = vec![0.0; N_PARAMS];
        for k in 0..4 {
            x[8 * k] = 1.0;
            x[8 * k + 6] = 1.0;
        }
        starts.push(x);
    }
    let random_start = |r: &mut R| loop {
        let x: Vec<f64> = (0..N_PARAMS).map(|_| r.sample(StandardNormal)).collect();
        if value_with_filters(&factor, &filters_from_params(&x)).is_some() {
            return x;
        }
    };
    let out = maximize_multistart(
        |x: &[f64]| {
            value_with_filters(&factor, &filters_from_params(x)).unwrap_or(f64::NEG_INFINITY)
        },
        &starts,
        random_start,
        0.3,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::sample_biseparable_4;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w4_state() -> ReducedDensityMatrix {
        let mut v = vec![C64::new(0.0, 0.0); 16];
        for i in SINGLES {
            v[i] = C64::new(0.5, 0.0);
        }
        ReducedDensityMatrix::from_pure(&v).unwrap()
    }

    #[test]
    fn w_state_identity_value() {
        // 6 * 1/4 - 4 * 1/4 - 0.
        assert!((w4_value_of_matrix(&w4_state()).unwrap() - 0.5).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = w4_criterion(&w4_state(), &OptimizerConfig::with_restarts(4), &mut rng).unwrap();
        assert!(r.value >= 0.5 - 1e-6, "{r:?}");
    }

    #[test]
    fn separable_state_gives_zero() {
        let mut v = vec![C64::new(0.0, 0.0); 16];
        v[0] = C64::new(1.0, 0.0);
        let rho = ReducedDensityMatrix::from_pure(&v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = w4_criterion(&rho, &OptimizerConfig::with_restarts(6), &mut rng).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn annihilating_filter_is_reported() {
        let mut v = vec![C64::new(0.0, 0.0); 16];
        v[0] = C64::new(1.0, 0.0);
        let rho = ReducedDensityMatrix::from_pure(&v).unwrap();
        // Projector on |1> for the first spin kills |0000>.
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let p1 = [[z, z], [z, o]];
        let id = [[o, z], [z, o]];
        assert!(w4_value_with_filters(&rho, &[p1, id, id, id])
            .unwrap()
            .is_none());
    }

    #[test]
    fn filter_route_matches_explicit_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = crate::measures::random_density_matrix(4, 3, &mut rng);
        let x: Vec<f64> = (0..N_PARAMS).map(|_| rng.sample(StandardNormal)).collect();
        let f = filters_from_params(&x);
        let fast = w4_value_with_filters(&rho, &f).unwrap().unwrap();
        let filtered = rho.conjugate_local(&f).unwrap();
        let t = filtered.trace();
        let slow = w4_value_of_matrix(&filtered.scaled(1.0 / t)).unwrap();
        assert!((fast - slow).abs() < 1e-12);
    }

    #[test]
    fn biseparable_samples_are_never_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = OptimizerConfig::with_restarts(3);
        for _ in 0..15 {
            let rho = sample_biseparable_4(&mut rng);
            let r = w4_criterion(&rho, &cfg, &mut rng).unwrap();
            assert_eq!(r.value, 0.0, "{r:?}");
        }
    }
}
