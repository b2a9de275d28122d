//! Dense statevector engine.
//!
//! Amplitudes are stored in the computational basis with site 0 as the most
//! significant bit: for `L` qubits, site `s` corresponds to bit `L - 1 - s` of
//! the amplitude index. Every partial trace and every reduced-matrix ordering
//! in the crate follows from this convention.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance on `max |U^dag U - I|` accepted at gate construction.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Outcome probabilities below this are treated as a corrupt state.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-14;

/// Largest chain the dense engine accepts (2^30 amplitudes is 16 GiB).
pub const MAX_QUBITS: usize = 30;

/// Parameters of the Ising-type brick `exp(-i (J ZZ + g (XI + IX) + h (ZI + IZ)))`.
///
/// The defaults are the usual chaotic kicked-Ising couplings and are only a
/// placeholder; set them explicitly to reproduce a particular model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetIsingParams {
    pub j: f64,
    pub g: f64,
    pub h: f64,
}

impl Default for FloquetIsingParams {
    fn default() -> Self {
        FloquetIsingParams {
            j: 1.0,
            g: 0.9045,
            h: 0.8090,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateFamily {
    Haar,
    FloquetIsing(FloquetIsingParams),
    /// A gate built directly from a user-supplied matrix.
    Custom,
}

/// A 4x4 unitary acting on an ordered pair of sites `(i, j)`.
///
/// Row/column index `2 * q_i + q_j`, so the first site of the pair is the
/// more significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitGate {
    matrix: [[C64; 4]; 4],
    family: GateFamily,
}

impl TwoQubitGate {
    pub fn new(matrix: [[C64; 4]; 4], family: GateFamily) -> Result<Self> {
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= UNITARITY_TOL) {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(TwoQubitGate { matrix, family })
    }

    pub fn from_matrix(matrix: [[C64; 4]; 4]) -> Result<Self> {
        Self::new(matrix, GateFamily::Custom)
    }

    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = ONE;
        }
        TwoQubitGate {
            matrix: m,
            family: GateFamily::Custom,
        }
    }

    pub fn swap() -> Self {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = ONE;
        m[1][2] = ONE;
        m[2][1] = ONE;
        m[3][3] = ONE;
        TwoQubitGate {
            matrix: m,
            family: GateFamily::Custom,
        }
    }

    /// Kronecker product `a ⊗ b` of two single-qubit unitaries.
    pub fn product(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> Result<Self> {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = a[r >> 1][c >> 1] * b[r & 1][c & 1];
            }
        }
        Self::from_matrix(m)
    }

    pub fn matrix(&self) -> &[[C64; 4]; 4] {
        &self.matrix
    }

    pub fn family(&self) -> GateFamily {
        self.family
    }

    pub fn determinant(&self) -> C64 {
        let m = Matrix4::from_fn(|r, c| self.matrix[r][c]);
        m.determinant()
    }
}

pub fn unitarity_deviation(m: &[[C64; 4]; 4]) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += m[k][r].conj() * m[k][c];
            }
            if r == c {
                acc -= ONE;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Haar-random element of U(4).
///
/// Gram-Schmidt on the columns of a complex Ginibre matrix. The implied `R`
/// factor has a positive real diagonal, which is the phase fix that makes the
/// QR map push the Ginibre measure forward to the Haar measure.
pub fn sample_haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitGate {
    loop {
        let mut cols = [[ZERO; 4]; 4];
        for col in cols.iter_mut() {
            for z in col.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *z = C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        if let Some(q) = orthonormalize_columns(cols) {
            let mut m = [[ZERO; 4]; 4];
            for (c, col) in q.iter().enumerate() {
                for r in 0..4 {
                    m[r][c] = col[r];
                }
            }
            // Two Gram-Schmidt passes keep the deviation near 1e-15.
            debug_assert!(unitarity_deviation(&m) <= UNITARITY_TOL);
            return TwoQubitGate {
                matrix: m,
                family: GateFamily::Haar,
            };
        }
    }
}

fn orthonormalize_columns(mut cols: [[C64; 4]; 4]) -> Option<[[C64; 4]; 4]> {
    for k in 0..4 {
        for _pass in 0..2 {
            for j in 0..k {
                let mut overlap = ZERO;
                for r in 0..4 {
                    overlap += cols[j][r].conj() * cols[k][r];
                }
                for r in 0..4 {
                    let d = overlap * cols[j][r];
                    cols[k][r] -= d;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        for z in cols[k].iter_mut() {
            *z /= norm;
        }
    }
    Some(cols)
}

/// `exp(-i H)` for the two-site Ising Hamiltonian with couplings `params`.
pub fn floquet_ising_gate(params: FloquetIsingParams) -> TwoQubitGate {
    let FloquetIsingParams { j, g, h } = params;
    // Basis |q_i q_j>, index 2 q_i + q_j; Z|0> = |0>, Z|1> = -|1>.
    let z = |q: usize| if q == 0 { 1.0 } else { -1.0 };
    let ham = Matrix4::from_fn(|r, c| {
        let (ri, rj) = (r >> 1, r & 1);
        let (ci, cj) = (c >> 1, c & 1);
        let mut v = 0.0;
        if r == c {
            v += j * z(ri) * z(rj) + h * (z(ri) + z(rj));
        }
        // X on either site flips exactly that bit.
        if rj == cj && ri != ci {
            v += g;
        }
        if ri == ci && rj != cj {
            v += g;
        }
        C64::new(v, 0.0)
    });
    let eig = SymmetricEigen::new(ham);
    let mut m = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                let phase = C64::from_polar(1.0, -eig.eigenvalues[k]);
                acc += eig.eigenvectors[(r, k)] * phase * eig.eigenvectors[(c, k)].conj();
            }
            m[r][c] = acc;
        }
    }
    TwoQubitGate {
        matrix: m,
        family: GateFamily::FloquetIsing(params),
    }
}

/// Record of one projective Z measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEvent {
    pub site: usize,
    pub layer: usize,
    pub outcome: u8,
    /// Born probability of `outcome` just before the projection.
    pub pre_probability: f64,
}

/// Pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// The all-zero product state `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::OutOfRange(format!(
                "basis index {index} for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps raw amplitudes, normalizing them to unit norm.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Config(
                "amplitudes have zero or non-finite norm".into(),
            ));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { n_qubits, amps })
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        let dim = 1usize << n_qubits;
        let amps = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    #[inline]
    pub(crate) fn bit_of(&self, site: usize) -> usize {
        self.n_qubits - 1 - site
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_qubits {
            return Err(Error::SiteOutOfRange {
                site,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies `gate` to sites `(i, j)`; `i` indexes the high bit of the gate.
    pub fn apply_two_qubit_gate(&mut self, gate: &TwoQubitGate, i: usize, j: usize) -> Result<()> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(Error::CoincidentSites(i));
        }
        let bi = self.bit_of(i);
        let bj = self.bit_of(j);
        let (lo, hi) = if bi < bj { (bi, bj) } else { (bj, bi) };
        let mi = 1usize << bi;
        let mj = 1usize << bj;
        let u = gate.matrix();
        let quarter = self.amps.len() >> 2;
        for k in 0..quarter {
            let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
            let idx = [base, base | mj, base | mi, base | mi | mj];
            let v = [
                self.amps[idx[0]],
                self.amps[idx[1]],
                self.amps[idx[2]],
                self.amps[idx[3]],
            ];
            for r in 0..4 {
                let row = &u[r];
                self.amps[idx[r]] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
            }
        }
        Ok(())
    }

    /// Born probabilities `(p0, p1)` of a Z measurement on `site`.
    pub fn outcome_probabilities(&self, site: usize) -> Result<(f64, f64)> {
        self.check_site(site)?;
        let mask = 1usize << self.bit_of(site);
        let (mut p0, mut p1) = (0.0, 0.0);
        for (idx, a) in self.amps.iter().enumerate() {
            if idx & mask == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        Ok((p0, p1))
    }

    /// Projective Z measurement on `site` with Born-rule sampling.
    ///
    /// The state is projected and divided by `sqrt(p_b)` immediately.
    pub fn measure_z<R: Rng + ?Sized>(
        &mut self,
        site: usize,
        layer: usize,
        rng: &mut R,
    ) -> Result<MeasurementEvent> {
        let (p0, p1) = self.outcome_probabilities(site)?;
        if p0 < MIN_OUTCOME_PROBABILITY && p1 < MIN_OUTCOME_PROBABILITY {
            return Err(Error::CorruptState { site, p0, p1 });
        }
        let total = p0 + p1;
        let draw: f64 = rng.gen();
        let outcome = if draw * total < p0 { 0 } else { 1 };
        let p = if outcome == 0 { p0 } else { p1 };
        self.collapse(site, outcome, p);
        Ok(MeasurementEvent {
            site,
            layer,
            outcome,
            pre_probability: p / total,
        })
    }

    /// Projects `site` onto a prescribed outcome (used when replaying a record).
    pub fn project_z(
        &mut self,
        site: usize,
        outcome: u8,
        layer: usize,
    ) -> Result<MeasurementEvent> {
        let (p0, p1) = self.outcome_probabilities(site)?;
        let p = if outcome == 0 { p0 } else { p1 };
        if p < MIN_OUTCOME_PROBABILITY {
            return Err(Error::ImpossibleOutcome {
                site,
                outcome,
                probability: p,
            });
        }
        let total = p0 + p1;
        self.collapse(site, outcome, p);
        Ok(MeasurementEvent {
            site,
            layer,
            outcome,
            pre_probability: p / total,
        })
    }

    fn collapse(&mut self, site: usize, outcome: u8, p: f64) {
        let mask = 1usize << self.bit_of(site);
        let keep = if outcome == 0 { 0 } else { mask };
        let scale = 1.0 / p.sqrt();
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if idx & mask == keep {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
    }
}

#[inline]
pub(crate) fn insert_zero_bit(k: usize, bit: usize) -> usize {
    let low = k & ((1usize << bit) - 1);
    ((k >> bit) << (bit + 1)) | low
}
