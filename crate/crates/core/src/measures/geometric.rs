//! Hilbert-Schmidt distance from a three-spin state to fully separable
//! mixtures `sum_k p_k rho_1^k ⊗ rho_2^k ⊗ rho_3^k`.
//!
//! A `k`-term ansatz has `9k` Bloch components (radially projected into the
//! unit ball) and `k - 1` free logits (the first is pinned to zero) mapped to
//! the simplex by a softmax: `9k + (k - 1)` real parameters, 69 at `k = 7`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::GmeResult;
use crate::density::ReducedDensityMatrix;
use crate::error::{Error, Result};
use crate::optimize::{maximize_multistart, OptimizerConfig};
use crate::state::C64;

/// Largest mixture size searched by default.
pub const DEFAULT_MAX_TERMS: usize = 7;

/// Distances below this end the search early (the state is separable).
const SEPARABLE_DISTANCE: f64 = 1e-9;

/// Logit given to the component added when moving from `k - 1` to `k` terms.
const NEW_COMPONENT_LOGIT: f64 = -4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableAnsatz {
    pub weights: Vec<f64>,
    /// Bloch vectors `[spin][xyz]` per component, each of length at most one.
    pub bloch: Vec<[[f64; 3]; 3]>,
}

impl SeparableAnsatz {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    fn from_params(params: &[f64], k: usize) -> Self {
        let bloch = (0..k)
            .map(|j| {
                let mut comp = [[0.0; 3]; 3];
                for (s, v) in comp.iter_mut().enumerate() {
                    let p = &params[9 * j + 3 * s..9 * j + 3 * s + 3];
                    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    let scale = if n > 1.0 { 1.0 / n } else { 1.0 };
                    *v = [p[0] * scale, p[1] * scale, p[2] * scale];
                }
                comp
            })
            .collect();
        let logits: Vec<f64> = std::iter::once(0.0)
            .chain(params[9 * k..9 * k + k - 1].iter().copied())
            .collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = exps.iter().sum();
        SeparableAnsatz {
            weights: exps.into_iter().map(|e| e / total).collect(),
            bloch,
        }
    }

    /// Row-major 8x8 matrix of the mixture.
    fn write_matrix(&self, out: &mut [C64; 64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (w, comp) in self.weights.iter().zip(&self.bloch) {
            let f = comp.map(bloch_matrix);
            for r in 0..8 {
                for c in 0..8 {
                    out[r * 8 + c] += f[0][r >> 2][c >> 2]
                        * f[1][(r >> 1) & 1][(c >> 1) & 1]
                        * f[2][r & 1][c & 1]
                        * *w;
                }
            }
        }
    }

    pub fn to_density(&self) -> ReducedDensityMatrix {
        let mut buf = [C64::new(0.0, 0.0); 64];
        self.write_matrix(&mut buf);
        let m = DMatrix::from_fn(8, 8, |r, c| buf[r * 8 + c]);
        ReducedDensityMatrix::from_parts(vec![0, 1, 2], m).expect("8x8")
    }
}

fn bloch_matrix(r: [f64; 3]) -> [[C64; 2]; 2] {
    [
        [
            C64::new(0.5 * (1.0 + r[2]), 0.0),
            C64::new(0.5 * r[0], -0.5 * r[1]),
        ],
        [
            C64::new(0.5 * r[0], 0.5 * r[1]),
            C64::new(0.5 * (1.0 - r[2]), 0.0),
        ],
    ]
}

/// Separable state encoded by a raw parameter vector of a `k`-term ansatz.
pub fn separable_ansatz_state(params: &[f64], k: usize) -> Result<ReducedDensityMatrix> {
    if k == 0 || params.len() != 10 * k - 1 {
        return Err(Error::OutOfRange(format!(
            "{}-term ansatz needs {} parameters, got {}",
            k,
            10 * k - 1,
            params.len()
        )));
    }
    Ok(SeparableAnsatz::from_params(params, k).to_density())
}

fn squared_distance(rho: &[C64], params: &[f64], k: usize, buf: &mut [C64; 64]) -> f64 {
    SeparableAnsatz::from_params(params, k).write_matrix(buf);
    rho.iter()
        .zip(buf.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum()
}

fn bloch_of_marginal(rho: &ReducedDensityMatrix, site: usize) -> [f64; 3] {
    let m = rho.partial_trace(&[site]).expect("spin belongs to rho");
    let off = m.get(1, 0);
    [2.0 * off.re, 2.0 * off.im, (m.get(0, 0) - m.get(1, 1)).re]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricResult {
    /// `value` and `raw_value` are the best distance over all mixture sizes.
    pub result: GmeResult,
    /// Best distance after allowing up to `k` terms, for `k = 1..=k_max`;
    /// non-increasing.
    pub per_k: Vec<f64>,
    pub nearest: SeparableAnsatz,
}

/// Geometric entanglement `D = min ||rho - rho_sep||_HS` over mixtures of up
/// to `k_max` product states.
///
/// Each mixture size starts from the previous optimum plus a low-weight
/// component, then from `opt.n_restarts` random ansatz points. With
/// `opt.include_identity_start` the one-term search also starts from the
/// product of the single-spin marginals.
pub fn geometric_entanglement<R: Rng + ?Sized>(
    rho: &ReducedDensityMatrix,
    k_max: usize,
    opt: &OptimizerConfig,
    rng: &mut R,
) -> Result<GeometricResult> {
    if rho.n_spins() != 3 {
        return Err(Error::WrongSpinCount {
            criterion: "D",
            expected: "3",
            actual: rho.n_spins(),
        });
    }
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    opt.validate()?;
    let flat = rho.to_row_major();
    let sites = rho.sites().to_vec();

    let mut per_k = Vec::with_capacity(k_max);
    let mut best_params: Vec<f64> = Vec::new();
    let mut best_sq = f64::INFINITY;
    let mut best_k = 1;
    let mut total_runs = 0;
    let mut total_iters = 0;
    let mut converged = true;

    for k in 1..=k_max {
        let n = 10 * k - 1;
        let mut starts = Vec::new();
        if k == 1 && opt.include_identity_start {
            starts.push(
                sites
                    .iter()
                    .flat_map(|&s| bloch_of_marginal(rho, s))
                    .collect(),
            );
        }
        if k > 1 {
            // Previous optimum, padded: Bloch block first, then the logits.
            let prev_k = best_k;
            let mut x = Vec::with_capacity(n);
            x.extend_from_slice(&best_params[..9 * prev_k]);
            for _ in prev_k..k {
                x.extend(random_bloch_block(rng));
            }
            x.extend_from_slice(&best_params[9 * prev_k..]);
            while x.len() < n {
                x.push(NEW_COMPONENT_LOGIT);
            }
            starts.push(x);
        }
        let random_start = |r: &mut R| {
            let mut x: Vec<f64> = (0..k).flat_map(|_| random_bloch_block(r)).collect();
            x.extend((1..k).map(|_| r.sample::<f64, _>(StandardNormal)));
            x
        };
        let scaled = OptimizerConfig {
            max_iterations: opt.max_iterations * (n / 8).max(1),
            ..*opt
        };
        let mut buf = [C64::new(0.0, 0.0); 64];
        let out = maximize_multistart(
            |x: &[f64]| -squared_distance(&flat, x, k, &mut buf),
            &starts,
            random_start,
            0.3,
            &scaled,
            rng,
        );
        total_runs += out.n_runs;
        total_iters += out.n_iterations;
        let sq = -out.value;
        if sq < best_sq {
            best_sq = sq;
            best_params = out.x;
            best_k = k;
            converged = out.converged;
        }
        per_k.push(best_sq.max(0.0).sqrt());
        if best_sq.max(0.0).sqrt() < SEPARABLE_DISTANCE {
            break;
        }
    }
    while per_k.len() < k_max {
        let last = *per_k.last().expect("at least one k");
        per_k.push(last);
    }

    let d = best_sq.max(0.0).sqrt();
    let nearest = SeparableAnsatz::from_params(&best_params, best_k);
    Ok(GeometricResult {
        result: GmeResult {
            value: d,
            raw_value: d,
            n_restarts: total_runs,
            n_iterations: total_iters,
            converged,
            screened: false,
            argmax: best_params,
        },
        per_k,
        nearest,
    })
}

/// Three Bloch vectors drawn uniformly on the unit sphere (pure products).
fn random_bloch_block<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    (0..3)
        .flat_map(|_| {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-12);
            [v[0] / n, v[1] / n, v[2] / n]
        })
        .collect()
}
