//! Reduced density matrices, partial traces and the logarithmic negativity.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{StateVector, C64, ONE, ZERO};

/// Dense reduced matrices are capped at this many spins (4096 x 4096).
pub const MAX_KEPT_SITES: usize = 12;

/// Tolerance for the Hermiticity / trace / positivity checks on construction.
pub const VALIDITY_TOL: f64 = 1e-10;

/// Single-qubit operator, row-major.
pub type Op2 = [[C64; 2]; 2];

/// Density matrix of `m` spins in the canonical computational basis: the
/// first entry of `sites` is the most significant bit, so for three spins the
/// basis order is `|000>, |001>, ..., |111>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensityMatrix {
    sites: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    /// Validating constructor: square, `2^m` sized, Hermitian, unit trace, PSD.
    pub fn new(sites: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_parts(sites, matrix)?;
        let herm = rho.hermiticity_error();
        if herm > VALIDITY_TOL {
            return Err(Error::OutOfRange(format!(
                "matrix not Hermitian (error {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::OutOfRange(format!("trace {tr} != 1")));
        }
        let lmin = rho.eigenvalues()[0];
        if lmin < -VALIDITY_TOL {
            return Err(Error::OutOfRange(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(rho)
    }

    /// Shape checks only; used for intermediate (possibly unnormalized) matrices.
    pub fn from_parts(sites: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let m = sites.len();
        if m == 0 || m > MAX_KEPT_SITES {
            return Err(Error::TooManySites {
                requested: m,
                max: MAX_KEPT_SITES,
            });
        }
        let dim = 1usize << m;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::OutOfRange(format!(
                "{}x{} matrix for {m} spins",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(ReducedDensityMatrix { sites, matrix })
    }

    /// Spins labelled `0..m`.
    pub fn with_default_sites(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::OutOfRange(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        let m = dim.trailing_zeros() as usize;
        Self::new((0..m).collect(), matrix)
    }

    /// `|psi><psi|` for a normalized (or normalizable) vector.
    pub fn from_pure(amps: &[C64]) -> Result<Self> {
        let psi = StateVector::from_amplitudes(amps.to_vec())?;
        let a = psi.amplitudes();
        let dim = a.len();
        let matrix = DMatrix::from_fn(dim, dim, |r, c| a[r] * a[c].conj());
        Self::from_parts((0..psi.n_qubits()).collect(), matrix)
    }

    pub fn maximally_mixed(m: usize) -> Result<Self> {
        let dim = 1usize << m;
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                C64::new(1.0 / dim as f64, 0.0)
            } else {
                ZERO
            }
        });
        Self::from_parts((0..m).collect(), matrix)
    }

    /// Single-spin state from a Bloch vector (`|r| <= 1` is not checked).
    pub fn from_bloch(r: [f64; 3]) -> Self {
        let matrix = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5 * (1.0 + r[2]), 0.0),
                C64::new(0.5 * r[0], -0.5 * r[1]),
                C64::new(0.5 * r[0], 0.5 * r[1]),
                C64::new(0.5 * (1.0 - r[2]), 0.0),
            ],
        );
        ReducedDensityMatrix {
            sites: vec![0],
            matrix,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Entry `(r, c)` with zero-based indices.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.matrix[(r, c)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for r in 0..d {
            for c in 0..d {
                acc += self.matrix[(r, c)].norm_sqr();
            }
        }
        acc
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Relabels the spins (same matrix).
    pub fn relabel(mut self, sites: Vec<usize>) -> Result<Self> {
        if sites.len() != self.sites.len() {
            return Err(Error::OutOfRange(
                "relabel with a different spin count".into(),
            ));
        }
        self.sites = sites;
        Ok(self)
    }

    /// Tensor product `self ⊗ other`; spin labels are concatenated with the
    /// other's labels shifted past this one's.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let matrix = DMatrix::from_fn(da * db, da * db, |r, c| {
            self.matrix[(r / db, c / db)] * other.matrix[(r % db, c % db)]
        });
        let m = self.n_spins() + other.n_spins();
        ReducedDensityMatrix {
            sites: (0..m).collect(),
            matrix,
        }
    }

    /// Convex combination `sum_k w_k rho_k` of equally sized matrices.
    pub fn mixture(parts: &[(f64, &ReducedDensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::OutOfRange("empty mixture".into()))?;
        let d = first.1.dim();
        let mut acc = DMatrix::from_element(d, d, ZERO);
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(Error::OutOfRange("mixture of different dimensions".into()));
            }
            acc += rho.matrix.map(|z| z * *w);
        }
        Self::from_parts(first.1.sites.clone(), acc)
    }

    /// Reorders the tensor factors: spin `k` of the result is spin `perm[k]` of `self`.
    pub fn permute_spins(&self, perm: &[usize]) -> Result<Self> {
        let m = self.n_spins();
        if perm.len() != m {
            return Err(Error::OutOfRange("permutation length".into()));
        }
        let mut seen = vec![false; m];
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::OutOfRange(format!("invalid permutation {perm:?}")));
            }
            seen[p] = true;
        }
        let map = |idx: usize| -> usize {
            // bit of spin k in the new index -> bit of spin perm[k] in the old one.
            let mut old = 0;
            for (k, &p) in perm.iter().enumerate() {
                let b = (idx >> (m - 1 - k)) & 1;
                old |= b << (m - 1 - p);
            }
            old
        };
        let d = self.dim();
        let matrix = DMatrix::from_fn(d, d, |r, c| self.matrix[(map(r), map(c))]);
        let sites = perm.iter().map(|&p| self.sites[p]).collect();
        Ok(ReducedDensityMatrix { sites, matrix })
    }

    /// Partial trace keeping the listed spins (given by label), in that order.
    pub fn partial_trace(&self, keep_sites: &[usize]) -> Result<Self> {
        let m = self.n_spins();
        let local: Vec<usize> = keep_sites
            .iter()
            .map(|s| {
                self.sites
                    .iter()
                    .position(|t| t == s)
                    .ok_or(Error::SiteOutOfRange {
                        site: *s,
                        n_qubits: m,
                    })
            })
            .collect::<Result<_>>()?;
        check_distinct(keep_sites)?;
        let traced: Vec<usize> = (0..m).filter(|k| !local.contains(k)).collect();
        let keep_bits: Vec<usize> = local.iter().map(|&k| m - 1 - k).collect();
        let env_bits: Vec<usize> = traced.iter().map(|&k| m - 1 - k).collect();
        let sub_offsets = deposit_table(&keep_bits);
        let env_offsets = deposit_table(&env_bits);
        let dk = sub_offsets.len();
        let matrix = DMatrix::from_fn(dk, dk, |r, c| {
            env_offsets
                .iter()
                .map(|&e| self.matrix[(e | sub_offsets[r], e | sub_offsets[c])])
                .sum()
        });
        Ok(ReducedDensityMatrix {
            sites: keep_sites.to_vec(),
            matrix,
        })
    }

    /// Partial transpose on the spins at local indices `parties`.
    pub fn partial_transpose(&self, parties: &[usize]) -> DMatrix<C64> {
        let m = self.n_spins();
        let mask = parties
            .iter()
            .filter(|&&k| k < m)
            .fold(0usize, |acc, &k| acc | (1 << (m - 1 - k)));
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| {
            let r2 = (r & !mask) | (c & mask);
            let c2 = (c & !mask) | (r & mask);
            self.matrix[(r2, c2)]
        })
    }

    /// `(A_1 ⊗ ... ⊗ A_m) rho (A_1 ⊗ ... ⊗ A_m)^dag`, without renormalizing.
    pub fn conjugate_local(&self, ops: &[Op2]) -> Result<Self> {
        let m = self.n_spins();
        if ops.len() != m {
            return Err(Error::OutOfRange(format!(
                "{} local operators for {m} spins",
                ops.len()
            )));
        }
        let d = self.dim();
        let k = DMatrix::from_fn(d, d, |r, c| {
            let mut acc = ONE;
            for (s, op) in ops.iter().enumerate() {
                let b = m - 1 - s;
                acc *= op[(r >> b) & 1][(c >> b) & 1];
            }
            acc
        });
        let matrix = &k * &self.matrix * k.adjoint();
        Ok(ReducedDensityMatrix {
            sites: self.sites.clone(),
            matrix,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ReducedDensityMatrix {
            sites: self.sites.clone(),
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    /// Copies the matrix into a row-major buffer.
    pub(crate) fn to_row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                out.push(self.matrix[(r, c)]);
            }
        }
        out
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    // Symmetrize first so round-off asymmetry does not leak into the solver.
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

fn check_distinct(sites: &[usize]) -> Result<()> {
    for (k, s) in sites.iter().enumerate() {
        if sites[..k].contains(s) {
            return Err(Error::DuplicateSite(*s));
        }
    }
    Ok(())
}

/// Offsets obtained by scattering the bits of `0..2^n` onto `bits`; the first
/// entry of `bits` receives the most significant bit.
fn deposit_table(bits: &[usize]) -> Vec<usize> {
    let n = bits.len();
    (0..1usize << n)
        .map(|v| {
            bits.iter()
                .enumerate()
                .fold(0, |acc, (k, &b)| acc | (((v >> (n - 1 - k)) & 1) << b))
        })
        .collect()
}

/// Reduced state of `keep_sites` (in that order) for a pure chain state.
pub fn partial_trace(state: &StateVector, keep_sites: &[usize]) -> Result<ReducedDensityMatrix> {
    let n = state.n_qubits();
    let m = keep_sites.len();
    if m == 0 || m > MAX_KEPT_SITES {
        return Err(Error::TooManySites {
            requested: m,
            max: MAX_KEPT_SITES,
        });
    }
    for &s in keep_sites {
        if s >= n {
            return Err(Error::SiteOutOfRange {
                site: s,
                n_qubits: n,
            });
        }
    }
    check_distinct(keep_sites)?;
    let keep_bits: Vec<usize> = keep_sites.iter().map(|&s| state.bit_of(s)).collect();
    let env_bits: Vec<usize> = (0..n)
        .filter(|s| !keep_sites.contains(s))
        .map(|s| state.bit_of(s))
        .collect();
    let sub = deposit_table(&keep_bits);
    let env = deposit_table(&env_bits);
    let d = sub.len();
    let amps = state.amplitudes();
    let mut acc = vec![ZERO; d * d];
    let mut v = vec![ZERO; d];
    for &e in &env {
        for (k, &o) in sub.iter().enumerate() {
            v[k] = amps[e | o];
        }
        for r in 0..d {
            let vr = v[r];
            if vr == ZERO {
                continue;
            }
            let row = &mut acc[r * d..(r + 1) * d];
            for c in r..d {
                row[c] += vr * v[c].conj();
            }
        }
    }
    let matrix = DMatrix::from_fn(d, d, |r, c| {
        if c >= r {
            acc[r * d + c]
        } else {
            acc[c * d + r].conj()
        }
    });
    Ok(ReducedDensityMatrix {
        sites: keep_sites.to_vec(),
        matrix,
    })
}

/// Eigenvalues of a partial transpose above `-NEGATIVITY_FLOOR` count as
/// non-negative round-off.
pub const NEGATIVITY_FLOOR: f64 = 1e-14;

/// `log2 || rho^{T_A} ||_1`, with `A` given as local spin indices of `rho`.
///
/// The trace norm is taken as `tr rho + 2 |sum of negative eigenvalues|`,
/// so PPT states give exactly 0 instead of round-off noise.
pub fn log_negativity(rho: &ReducedDensityMatrix, partition: &[usize]) -> f64 {
    let pt = rho.partial_transpose(partition);
    let negative: f64 = hermitian_eigenvalues(&pt)
        .iter()
        .filter(|&&l| l < -NEGATIVITY_FLOOR)
        .map(|l| -l)
        .sum();
    if negative == 0.0 {
        return 0.0;
    }
    (rho.trace() + 2.0 * negative).log2().max(0.0)
}

/// Serializable snapshot of a reduced matrix (row-major `[re, im]` pairs).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensitySnapshot {
    pub sites: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ReducedDensityMatrix> for DensitySnapshot {
    fn from(rho: &ReducedDensityMatrix) -> Self {
        DensitySnapshot {
            sites: rho.sites.clone(),
            entries: rho.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&DensitySnapshot> for ReducedDensityMatrix {
    type Error = Error;

    fn try_from(s: &DensitySnapshot) -> Result<Self> {
        let d = 1usize << s.sites.len();
        if s.entries.len() != d * d {
            return Err(Error::OutOfRange("snapshot entry count".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |r, c| {
            let [re, im] = s.entries[r * d + c];
            C64::new(re, im)
        });
        ReducedDensityMatrix::new(s.sites.clone(), matrix)
    }
}
