//! Derivative-free simplex search with random restarts.
//!
//! The entanglement criteria are non-smooth (moduli, square roots of
//! vanishing diagonals), so every maximization in the crate goes through the
//! Nelder-Mead routine here. Coefficients follow the dimension-adaptive
//! choice of Gao and Han, which behaves much better than the textbook values
//! on the 30-70 parameter problems of the separable-state ansatz.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Budget and stopping rule of a multi-start search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Random starting points in addition to the deterministic ones.
    pub n_restarts: usize,
    /// Iteration cap per simplex run.
    pub max_iterations: usize,
    /// Spread of objective values across the simplex at convergence.
    pub tolerance: f64,
    /// Always start one run from the analytic reference point (identity
    /// rotation / identity filter / marginal product).
    pub include_identity_start: bool,
    /// Skip the search when a spectral bound already certifies a
    /// non-positive criterion.
    pub spectral_screen: bool,
}

impl OptimizerConfig {
    pub fn with_restarts(n_restarts: usize) -> Self {
        OptimizerConfig {
            n_restarts,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(crate::Error::Config(format!(
                "optimizer needs max_iterations > 0 and tolerance > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n_restarts: 24,
            max_iterations: 4000,
            tolerance: 1e-11,
            include_identity_start: true,
            spectral_screen: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an initial simplex of edge `step`.
pub fn nelder_mead<F>(
    f: &mut F,
    x0: &[f64],
    step: f64,
    max_iterations: usize,
    tolerance: f64,
) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n.max(1) as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for k in 0..n {
        let mut p = x0.to_vec();
        p[k] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evaluations)).collect();
    if n == 0 {
        return SimplexOutcome {
            x: Vec::new(),
            value: vals[0],
            iterations: 0,
            evaluations,
            converged: true,
        };
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        // The parametrizations have flat directions (e.g. the azimuth of a
        // pole state), so only the spread of values is tested; the polish
        // run of the multi-start driver guards against early stops.
        if vals[worst] - vals[best] <= tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[k]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= nf);

        for i in 0..n {
            trial[i] = centroid[i] + alpha * (centroid[i] - pts[worst][i]);
        }
        let f_r = eval(&trial, &mut evaluations);

        if f_r < vals[best] {
            for i in 0..n {
                trial2[i] = centroid[i] + gamma * (trial[i] - centroid[i]);
            }
            let f_e = eval(&trial2, &mut evaluations);
            if f_e < f_r {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = f_e;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = f_r;
            }
            continue;
        }
        if f_r < vals[second_worst] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = f_r;
            continue;
        }
        // Contraction, outside or inside.
        let outside = f_r < vals[worst];
        for i in 0..n {
            trial2[i] = if outside {
                centroid[i] + rho * (trial[i] - centroid[i])
            } else {
                centroid[i] - rho * (centroid[i] - pts[worst][i])
            };
        }
        let f_c = eval(&trial2, &mut evaluations);
        if (outside && f_c <= f_r) || (!outside && f_c < vals[worst]) {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = f_c;
            continue;
        }
        // Shrink towards the best vertex.
        let anchor = pts[best].clone();
        for &k in &order[1..] {
            for (x, a) in pts[k].iter_mut().zip(&anchor) {
                *x = a + sigma * (*x - a);
            }
            vals[k] = eval(&pts[k], &mut evaluations);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    SimplexOutcome {
        x: pts[best].clone(),
        value: vals[best],
        iterations,
        evaluations,
        converged,
    }
}

/// Best point found by a multi-start search.
#[derive(Clone, Debug)]
pub struct MultiStartOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Number of simplex runs actually started.
    pub n_runs: usize,
    /// Iterations summed over all runs.
    pub n_iterations: usize,
    /// Whether the run that produced the best value met the tolerance.
    pub converged: bool,
}

/// Maximizes `objective` from the deterministic `starts` followed by
/// `cfg.n_restarts` random points drawn by `random_start`.
///
/// Each run is polished by a second simplex restarted at its end point.
/// Runs are performed in a fixed order, so the best value is non-decreasing
/// in `n_restarts` for a fixed RNG seed.
pub fn maximize_multistart<F, S, R>(
    mut objective: F,
    starts: &[Vec<f64>],
    mut random_start: S,
    step: f64,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> MultiStartOutcome
where
    F: FnMut(&[f64]) -> f64,
    S: FnMut(&mut R) -> Vec<f64>,
    R: Rng + ?Sized,
{
    let mut neg = |x: &[f64]| -objective(x);
    let mut best: Option<MultiStartOutcome> = None;
    let mut n_runs = 0;
    let mut n_iterations = 0;

    let mut run = |x0: Vec<f64>, best: &mut Option<MultiStartOutcome>| {
        let first = nelder_mead(&mut neg, &x0, step, cfg.max_iterations, cfg.tolerance);
        let polish = nelder_mead(
            &mut neg,
            &first.x,
            step * 0.1,
            cfg.max_iterations,
            cfg.tolerance,
        );
        let (out, iters) = if polish.value <= first.value {
            (polish.clone(), first.iterations + polish.iterations)
        } else {
            (first.clone(), first.iterations + polish.iterations)
        };
        let value = -out.value;
        let better = best.as_ref().map_or(true, |b| value > b.value);
        if better {
            *best = Some(MultiStartOutcome {
                x: out.x,
                value,
                n_runs: 0,
                n_iterations: 0,
                converged: polish.converged,
            });
        }
        iters
    };

    for x0 in starts {
        n_iterations += run(x0.clone(), &mut best);
        n_runs += 1;
    }
    for _ in 0..cfg.n_restarts {
        let x0 = random_start(rng);
        n_iterations += run(x0, &mut best);
        n_runs += 1;
    }
    let mut out = best.expect("multistart needs at least one start");
    out.n_runs = n_runs;
    out.n_iterations = n_iterations;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimizes_rosenbrock() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = nelder_mead(&mut f, &[-1.2, 1.0], 0.5, 10_000, 1e-14);
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn handles_nonsmooth_objective() {
        let mut f = |x: &[f64]| x.iter().map(|v| (v - 0.25).abs()).sum::<f64>();
        let out = nelder_mead(&mut f, &[1.0, -1.0, 2.0, 0.0], 0.3, 20_000, 1e-12);
        assert!(out.value < 1e-5, "{}", out.value);
    }

    #[test]
    fn multistart_is_monotone_in_restarts() {
        // Many local maxima.
        let f = |x: &[f64]| {
            (3.0 * x[0]).sin() * (2.0 * x[1]).cos() - 0.05 * (x[0] * x[0] + x[1] * x[1])
        };
        let mut last = f64::NEG_INFINITY;
        for restarts in [0, 1, 2, 4, 8] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let cfg = OptimizerConfig::with_restarts(restarts);
            let out = maximize_multistart(
                f,
                &[vec![2.0, 2.0]],
                |r: &mut ChaCha8Rng| vec![r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0)],
                0.5,
                &cfg,
                &mut rng,
            );
            assert_eq!(out.n_runs, restarts + 1);
            assert!(out.value >= last);
            last = out.value;
        }
    }
}
