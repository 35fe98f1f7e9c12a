//! Statevectors and piecewise-constant evolution under the Rydberg resource
//! Hamiltonian.
//!
//! Units: hbar = 1, frequencies in rad/us, times in us. The occupation
//! operator is `n = |1><1|`, so an unexcited register `|0...0>` is left
//! untouched by detunings and by the Ising interaction. Each constant segment
//! is propagated exactly through a Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::{InteractionModel, Register};
use crate::Limits;

/// Shortest allowed segment, us.
pub const DEFAULT_MIN_SEGMENT: f64 = 0.004;

const NORM_DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        QuantumState::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize {
            return Err(Error::Invalid(format!("unsupported qubit count {n_qubits}")));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            n_qubits,
            amplitudes,
        })
    }

    /// Normalizes `amplitudes`, whose length must be a power of two (at least 2).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut s = QuantumState::from_amplitudes_unchecked(amplitudes);
        if s.amplitudes.len() < 2 || !s.amplitudes.len().is_power_of_two() {
            return Err(Error::Invalid(format!(
                "amplitude vector length {} is not a power of two",
                s.amplitudes.len()
            )));
        }
        let norm = s.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite("state amplitudes".into()));
        }
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        s.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    /// Wraps amplitudes as given, without normalizing.
    pub fn from_amplitudes_unchecked(amplitudes: Vec<Complex64>) -> Self {
        let n_qubits = amplitudes.len().max(1).trailing_zeros() as usize;
        QuantumState {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `<sum_i n_i>`, the mean number of excited atoms.
    pub fn excitation_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| b.count_ones() as f64 * a.norm_sqr())
            .sum()
    }
}

/// Scalar broadcast to every atom, or one value per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Global(f64),
    Local(Vec<f64>),
}

impl Field {
    pub fn is_global(&self) -> bool {
        matches!(self, Field::Global(_))
    }

    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        let v = match self {
            Field::Global(x) => vec![*x; n],
            Field::Local(v) if v.len() == n => v.clone(),
            Field::Local(v) => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                })
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("drive field".into()));
        }
        Ok(v)
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Global(x)
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field::Local(v)
    }
}

/// How the detuning couples to each atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZConvention {
    /// `-delta * n`.
    #[default]
    Projector,
    /// `-(delta/2) * (2n - I)`; differs from `Projector` by an identity shift.
    HalfZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSegment {
    pub duration_us: f64,
    pub omega: Field,
    pub delta: Field,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub z_convention: ZConvention,
}

impl DriveSegment {
    pub fn global(duration_us: f64, omega: f64, delta: f64) -> Self {
        DriveSegment {
            duration_us,
            omega: Field::Global(omega),
            delta: Field::Global(delta),
            phase: 0.0,
            z_convention: ZConvention::Projector,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_convention(mut self, z: ZConvention) -> Self {
        self.z_convention = z;
        self
    }

    fn validate(&self, n: usize, min_segment: f64) -> Result<()> {
        if !self.duration_us.is_finite() || !self.phase.is_finite() {
            return Err(Error::NonFinite("segment duration or phase".into()));
        }
        if self.duration_us < min_segment {
            return Err(Error::Invalid(format!(
                "segment duration {} us is below the minimum {} us",
                self.duration_us, min_segment
            )));
        }
        if self.omega.resolve(n)?.iter().any(|&w| w < 0.0) {
            return Err(Error::Invalid("Rabi frequency must be non-negative".into()));
        }
        self.delta.resolve(n)?;
        Ok(())
    }
}

fn default_min_segment() -> f64 {
    DEFAULT_MIN_SEGMENT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    pub segments: Vec<DriveSegment>,
    #[serde(default)]
    pub global_only: bool,
    #[serde(default = "default_min_segment")]
    pub min_segment: f64,
}

impl PulseSequence {
    pub fn new(segments: Vec<DriveSegment>) -> Self {
        PulseSequence {
            segments,
            global_only: false,
            min_segment: DEFAULT_MIN_SEGMENT,
        }
    }

    /// Like [`PulseSequence::new`] but rejects per-atom fields on validation.
    pub fn global(segments: Vec<DriveSegment>) -> Self {
        PulseSequence {
            global_only: true,
            ..PulseSequence::new(segments)
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_us).sum()
    }

    pub fn validate(&self, n_atoms: usize) -> Result<()> {
        if !(self.min_segment.is_finite() && self.min_segment > 0.0) {
            return Err(Error::Invalid("min_segment must be positive".into()));
        }
        for s in &self.segments {
            if self.global_only && !(s.omega.is_global() && s.delta.is_global()) {
                return Err(Error::Invalid(
                    "per-atom drive fields are not allowed in a global-only pulse".into(),
                ));
            }
            s.validate(n_atoms, self.min_segment)?;
        }
        if !self.total_duration().is_finite() {
            return Err(Error::NonFinite("total pulse duration".into()));
        }
        Ok(())
    }
}

fn check_cap(n: usize, limits: &Limits) -> Result<()> {
    if n > limits.dynamics_qubits {
        return Err(Error::CapExceeded {
            what: "dynamics",
            size: n,
            cap: limits.dynamics_qubits,
        });
    }
    Ok(())
}

/// Diagonal part of the resource Hamiltonian in the computational basis.
fn diagonal(r: &Register, delta: &[f64], z: ZConvention) -> Vec<f64> {
    let n = r.len();
    let dim = 1usize << n;
    let mut pairs = Vec::new();
    if let InteractionModel::Ising { .. } = r.model() {
        for i in 0..n {
            for j in 0..i {
                pairs.push((i, j, r.model().strength(r.distance(i, j))));
            }
        }
    }
    let shift: f64 = match z {
        ZConvention::Projector => 0.0,
        ZConvention::HalfZ => delta.iter().sum::<f64>() / 2.0,
    };
    (0..dim)
        .map(|b| {
            let mut e = shift;
            for (i, d) in delta.iter().enumerate() {
                if b >> i & 1 == 1 {
                    e -= d;
                }
            }
            for &(i, j, v) in &pairs {
                if b >> i & 1 == 1 && b >> j & 1 == 1 {
                    e += v;
                }
            }
            e
        })
        .collect()
}

/// Dense resource Hamiltonian for one segment:
/// `sum_i (Omega_i/2)(cos(phi) X_i + sin(phi) Y_i)`, the detuning term in the
/// segment's convention, and the register interaction.
pub fn build_hamiltonian(r: &Register, seg: &DriveSegment) -> Result<DMatrix<Complex64>> {
    build_hamiltonian_within(r, seg, &Limits::default())
}

pub fn build_hamiltonian_within(
    r: &Register,
    seg: &DriveSegment,
    limits: &Limits,
) -> Result<DMatrix<Complex64>> {
    let n = r.len();
    check_cap(n, limits)?;
    let omega = seg.omega.resolve(n)?;
    let delta = seg.delta.resolve(n)?;
    let dim = 1usize << n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for (b, e) in diagonal(r, &delta, seg.z_convention).into_iter().enumerate() {
        h[(b, b)] = e.into();
    }
    let (s, c) = seg.phase.sin_cos();
    for (i, &w) in omega.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for b in 0..dim {
            let sign = if b >> i & 1 == 0 { 1.0 } else { -1.0 };
            h[(b ^ (1 << i), b)] += Complex64::new(c, s * sign) * (w / 2.0);
        }
    }
    if let InteractionModel::Xy { .. } = r.model() {
        for i in 0..n {
            for j in 0..i {
                // Ordered-pair sum: each unordered pair contributes twice.
                let v = 2.0 * r.model().strength(r.distance(i, j));
                let flip = (1 << i) | (1 << j);
                for b in 0..dim {
                    if (b >> i & 1) != (b >> j & 1) {
                        h[(b ^ flip, b)] += Complex64::new(2.0 * v, 0.0);
                    }
                }
            }
        }
    }
    Ok(h)
}

fn is_diagonal(r: &Register, seg: &DriveSegment) -> bool {
    matches!(r.model(), InteractionModel::Ising { .. })
        && match &seg.omega {
            Field::Global(w) => *w == 0.0,
            Field::Local(v) => v.iter().all(|&w| w == 0.0),
        }
}

fn renormalize(amps: &mut [Complex64]) -> Result<()> {
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::NonFinite("evolved amplitudes".into()));
    }
    if (norm - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::NotNormalized { norm });
    }
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok(())
}

/// `exp(-i H t) psi` for Hermitian `h`.
pub fn apply_propagator(h: DMatrix<Complex64>, t: f64, psi: &[Complex64]) -> Vec<Complex64> {
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let psi = DVector::from_column_slice(psi);
    let mut coeffs = v.adjoint() * psi;
    for (c, &lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= Complex64::from_polar(1.0, -lambda * t);
    }
    (v * coeffs).iter().copied().collect()
}

/// Applies each segment's propagator in order.
pub fn evolve(psi0: &QuantumState, r: &Register, pulse: &PulseSequence) -> Result<QuantumState> {
    evolve_within(psi0, r, pulse, &Limits::default())
}

pub fn evolve_within(
    psi0: &QuantumState,
    r: &Register,
    pulse: &PulseSequence,
    limits: &Limits,
) -> Result<QuantumState> {
    let n = r.len();
    check_cap(n, limits)?;
    if psi0.dim() != 1usize << n {
        return Err(Error::DimensionMismatch {
            expected: 1usize << n,
            got: psi0.dim(),
        });
    }
    pulse.validate(n)?;
    let mut amps = psi0.amplitudes.clone();
    for seg in &pulse.segments {
        let t = seg.duration_us;
        if is_diagonal(r, seg) {
            let diag = diagonal(r, &seg.delta.resolve(n)?, seg.z_convention);
            for (a, e) in amps.iter_mut().zip(diag) {
                *a *= Complex64::from_polar(1.0, -e * t);
            }
        } else {
            let h = build_hamiltonian_within(r, seg, limits)?;
            amps = apply_propagator(h, t, &amps);
        }
        renormalize(&mut amps)?;
    }
    Ok(QuantumState {
        n_qubits: n,
        amplitudes: amps,
    })
}

/// Parses a bitstring written in ket order (qubit 0 is the last character).
pub fn parse_bitstring(bits: &str) -> Result<usize> {
    let n = bits.chars().count();
    if n == 0 || n >= usize::BITS as usize {
        return Err(Error::Invalid(format!("bitstring length {n} unsupported")));
    }
    let mut index = 0usize;
    for (k, c) in bits.chars().enumerate() {
        let bit = match c {
            '0' => 0,
            '1' => 1,
            _ => return Err(Error::parse(1, k + 1, format!("expected 0 or 1, found {c:?}"))),
        };
        index |= bit << (n - 1 - k);
    }
    Ok(index)
}

/// Formats `index` as an `n`-character ket-order bitstring.
pub fn format_bitstring(index: usize, n: usize) -> String {
    (0..n)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Computational basis state for a ket-order bitstring: `"01"` sets qubit 0.
pub fn prepare_product_state(bits: &str) -> Result<QuantumState> {
    prepare_product_state_within(bits, &Limits::default())
}

pub fn prepare_product_state_within(bits: &str, limits: &Limits) -> Result<QuantumState> {
    let index = parse_bitstring(bits)?;
    let n = bits.chars().count();
    if n > limits.matrix_qubits {
        return Err(Error::CapExceeded {
            what: "product state",
            size: n,
            cap: limits.matrix_qubits,
        });
    }
    QuantumState::basis(n, index)
}

/// `exp(-i t (delta0 Z0 + delta1 Z1 + H_XY)) |01>` on a two-atom XY register.
///
/// The evolution stays in the `{|01>, |10>}` block, so it is evaluated in
/// closed form there and the other amplitudes are exactly zero.
pub fn ucc_xy_state(delta0: f64, delta1: f64, t: f64, r: &Register) -> Result<QuantumState> {
    if r.len() != 2 {
        return Err(Error::QubitMismatch {
            left: r.len(),
            right: 2,
        });
    }
    let InteractionModel::Xy { .. } = r.model() else {
        return Err(Error::Invalid("the UCC-XY state needs an XY register".into()));
    };
    if ![delta0, delta1, t].iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("UCC-XY parameters".into()));
    }
    // Block Hamiltonian a*sigma_z + b*sigma_x with |01> as the upper state.
    let a = delta1 - delta0;
    let b = 4.0 * r.model().strength(r.distance(0, 1));
    let w = a.hypot(b);
    let (s, c) = (w * t).sin_cos();
    let (up, down) = if w == 0.0 {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (Complex64::new(c, -s * a / w), Complex64::new(0.0, -s * b / w))
    };
    let zero = Complex64::new(0.0, 0.0);
    QuantumState::from_amplitudes(vec![zero, up, down, zero])
}
