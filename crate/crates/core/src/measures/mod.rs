//! Multipartite entanglement criteria on reduced density matrices.
//!
//! All criteria are lower bounds obtained by numerical maximization, so a
//! reported value is the best found by the multi-start search and never
//! exceeds the true optimum. A positive `value` certifies genuine
//! multipartite entanglement (for `W`, `I2`, `W4`); zero is inconclusive.

mod bisep;
mod geometric;
mod i2;
mod w3;
mod w4;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::density::ReducedDensityMatrix;
use crate::state::C64;

pub use bisep::{
    random_density_matrix, random_pure_density, sample_biseparable_3, sample_biseparable_4,
};
pub use geometric::{
    geometric_entanglement, separable_ansatz_state, GeometricResult, SeparableAnsatz,
    DEFAULT_MAX_TERMS,
};
pub use i2::{i2_criterion, i2_value_at};
pub use w3::{w_criterion, w_value_at_rotation, w_value_of_matrix};
pub use w4::{w4_criterion, w4_value_of_matrix, w4_value_with_filters};

/// Raw criterion values at or below this are reported as zero.
///
/// The subtracted terms are square roots of products of diagonal entries.
/// An entry that vanishes exactly carries a rounding error near machine
/// epsilon, and the square root lifts it to about `1e-8`; the maximizer
/// finds such points on the boundary of the biseparable set, so raw
/// values up to this size are not detections.
pub const NUMERICAL_ZERO: f64 = 1e-7;

/// Outcome of one criterion evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmeResult {
    /// Clamped value: `raw_value` if it exceeds [`NUMERICAL_ZERO`], else 0.
    pub value: f64,
    /// Best objective found, unclamped.
    pub raw_value: f64,
    pub n_restarts: usize,
    pub n_iterations: usize,
    pub converged: bool,
    /// A spectral bound proved the criterion non-positive; no search was run
    /// and `raw_value` is that bound.
    #[serde(default)]
    pub screened: bool,
    /// Parameters of the best point (criterion specific).
    #[serde(skip)]
    pub argmax: Vec<f64>,
}

impl GmeResult {
    pub(crate) fn from_search(
        raw: f64,
        n_restarts: usize,
        n_iterations: usize,
        converged: bool,
        argmax: Vec<f64>,
    ) -> Self {
        GmeResult {
            value: clamp(raw),
            raw_value: raw,
            n_restarts,
            n_iterations,
            converged,
            screened: false,
            argmax,
        }
    }

    pub(crate) fn screened(bound: f64) -> Self {
        GmeResult {
            value: 0.0,
            raw_value: bound,
            n_restarts: 0,
            n_iterations: 0,
            converged: true,
            screened: true,
            argmax: Vec::new(),
        }
    }

    pub fn detected(&self) -> bool {
        self.value > 0.0
    }
}

pub(crate) fn clamp(raw: f64) -> f64 {
    if raw > NUMERICAL_ZERO {
        raw
    } else {
        0.0
    }
}

/// `Ry(theta) Rz(phi)`; together with an (irrelevant) outer Z rotation this
/// is the ZYZ Euler form of SU(2).
#[inline]
pub(crate) fn rotation(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    let em = C64::from_polar(1.0, -0.5 * phi);
    let ep = C64::from_polar(1.0, 0.5 * phi);
    [[em * c, -ep * s], [em * s, ep * c]]
}

/// Pure qubit state `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
#[inline]
pub(crate) fn qubit_state(theta: f64, phi: f64) -> [C64; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [C64::new(c, 0.0), C64::from_polar(s, phi)]
}

/// Rows of the Kronecker product of single-qubit matrices: row `a` of
/// `ops[0] ⊗ ... ⊗ ops[m-1]`, written into `out[a * d..(a + 1) * d]`.
pub(crate) fn kron_rows(ops: &[[[C64; 2]; 2]], out: &mut [C64]) {
    let m = ops.len();
    let d = 1usize << m;
    for a in 0..d {
        for c in 0..d {
            let mut acc = C64::new(1.0, 0.0);
            for (k, op) in ops.iter().enumerate() {
                let b = m - 1 - k;
                acc *= op[(a >> b) & 1][(c >> b) & 1];
            }
            out[a * d + c] = acc;
        }
    }
}

/// Eigenvalues at or below this are dropped from a [`Factor`].
const MIN_FACTOR_EIGENVALUE: f64 = 1e-15;

/// Square-root factor `rho = sum_k f_k f_k^dag` from the eigen-decomposition.
///
/// Quadratic forms evaluated as sums of squared projections are
/// non-negative with relative rounding error, so the square roots of
/// vanishing diagonal entries stay at round-off level instead of `1e-8`.
pub(crate) struct Factor {
    d: usize,
    rank: usize,
    /// `rank` rows of length `d`.
    rows: Vec<C64>,
}

impl Factor {
    pub(crate) fn new(rho: &ReducedDensityMatrix) -> Self {
        let m = rho.matrix();
        let herm = (m + m.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(herm);
        let d = rho.dim();
        let mut rows = Vec::with_capacity(d * d);
        for k in 0..d {
            let l = eig.eigenvalues[k];
            if l > MIN_FACTOR_EIGENVALUE {
                let s = l.sqrt();
                rows.extend((0..d).map(|r| eig.eigenvectors[(r, k)] * s));
            }
        }
        Factor {
            d,
            rank: rows.len() / d,
            rows,
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// `p_k = sum_r x_r f_k[r]` for a row `x` of a local transformation;
    /// then `(X rho X^dag)_ab = sum_k p_k(x_a) conj(p_k(x_b))`.
    #[inline]
    pub(crate) fn project_row(&self, x: &[C64], out: &mut [C64]) {
        for (k, o) in out[..self.rank].iter_mut().enumerate() {
            let f = &self.rows[k * self.d..(k + 1) * self.d];
            *o = x.iter().zip(f).map(|(a, b)| a * b).sum();
        }
    }

    /// `q_k = sum_r conj(u_r) f_k[r]`; then `<u|rho|v> = sum_k q_k(u) conj(q_k(v))`.
    #[inline]
    pub(crate) fn project_ket(&self, u: &[C64], out: &mut [C64]) {
        for (k, o) in out[..self.rank].iter_mut().enumerate() {
            let f = &self.rows[k * self.d..(k + 1) * self.d];
            *o = u.iter().zip(f).map(|(a, b)| a.conj() * b).sum();
        }
    }
}

/// Largest entry deviation below which a state counts as a product.
const PRODUCT_TOLERANCE: f64 = 1e-12;

/// True if `rho` equals `rho_A ⊗ rho_B` for some bipartition, up to
/// [`PRODUCT_TOLERANCE`]. Such states are biseparable, so every criterion
/// is non-positive on them. Spins measured in the last layer make this the
/// common case in monitored circuits.
pub(crate) fn splits_across_cut(rho: &ReducedDensityMatrix) -> bool {
    let m = rho.n_spins();
    let Ok(local) = rho.clone().relabel((0..m).collect()) else {
        return false;
    };
    // Subsets containing spin 0 cover each cut once.
    (0..(1usize << (m - 1))).any(|mask| {
        let a: Vec<usize> = (0..m)
            .filter(|&k| k == 0 || (mask >> (k - 1)) & 1 == 1)
            .collect();
        let b: Vec<usize> = (0..m).filter(|k| !a.contains(k)).collect();
        if b.is_empty() {
            return false;
        }
        let (Ok(ra), Ok(rb)) = (local.partial_trace(&a), local.partial_trace(&b)) else {
            return false;
        };
        let order: Vec<usize> = a.iter().chain(&b).copied().collect();
        let perm: Vec<usize> = (0..m)
            .map(|k| order.iter().position(|&o| o == k).unwrap_or(0))
            .collect();
        match ra.kron(&rb).permute_spins(&perm) {
            Ok(prod) => (prod.matrix() - local.matrix()).camax() <= PRODUCT_TOLERANCE,
            Err(_) => false,
        }
    })
}

#[inline]
pub(crate) fn norm_sqr(p: &[C64]) -> f64 {
    p.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
pub(crate) fn overlap(p: &[C64], q: &[C64]) -> C64 {
    p.iter().zip(q).map(|(a, b)| a * b.conj()).sum()
}
