//! Pauli strings, weighted Pauli Hamiltonians and their dense realization.
//!
//! Qubit ordering is little-endian throughout the crate: qubit 0 is the least
//! significant bit of a computational basis index, so `|b1 b0>` has index
//! `2*b1 + b0`. `Z` has eigenvalue `+1` on `|0>`. Dense labels and bitstrings
//! are written in ket order, with qubit 0 as the rightmost character.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::QuantumState;
use crate::error::{Error, Result};
use crate::Limits;

/// Largest register a [`PauliString`] can describe (one bit per qubit).
pub const MAX_STRING_QUBITS: usize = 64;

/// Coefficients below this magnitude are dropped when a Hamiltonian is built.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const NON_IDENTITY: [PauliLetter; 3] = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliLetter::I),
            'X' => Some(PauliLetter::X),
            'Y' => Some(PauliLetter::Y),
            'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }
}

/// Tensor product of single-qubit Paulis, stored as X and Z bit masks.
///
/// A qubit carries `X` when only its x bit is set, `Z` when only its z bit is
/// set and `Y` when both are. Absent qubits are identity, so the
/// representation is canonical by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(PauliString {
            n_qubits,
            x: 0,
            z: 0,
        })
    }

    /// Builds a string from `(qubit, letter)` pairs. Identity letters are
    /// skipped; a qubit listed twice with non-identity letters is an error.
    pub fn from_letters<I>(n_qubits: usize, letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, PauliLetter)>,
    {
        let mut s = PauliString::identity(n_qubits)?;
        for (q, letter) in letters {
            if q >= n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits });
            }
            if letter == PauliLetter::I {
                continue;
            }
            if s.letter(q) != PauliLetter::I {
                return Err(Error::Invalid(format!("qubit {q} listed twice")));
            }
            s.set(q, letter);
        }
        Ok(s)
    }

    /// Parses a dense label written in ket order: the last character is
    /// qubit 0, so `"XIZ"` is `Z0 X2`.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        let letters = label
            .chars()
            .enumerate()
            .map(|(j, c)| {
                PauliLetter::from_char(c)
                    .map(|l| (n - 1 - j, l))
                    .ok_or_else(|| Error::parse(1, j + 1, format!("invalid Pauli letter `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(n, letters)
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        debug_assert!(n_qubits <= MAX_STRING_QUBITS);
        PauliString { n_qubits, x, z }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Bit mask of the qubits carrying a non-identity letter.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn has_full_support(&self) -> bool {
        self.weight() == self.n_qubits
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn letter(&self, q: usize) -> PauliLetter {
        PauliLetter::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    pub(crate) fn set(&mut self, q: usize, letter: PauliLetter) {
        let (x, z) = letter.bits();
        let bit = 1u64 << q;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    /// Non-identity letters in ascending qubit order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, PauliLetter)> + '_ {
        (0..self.n_qubits)
            .map(|q| (q, self.letter(q)))
            .filter(|(_, l)| *l != PauliLetter::I)
    }

    /// Dense label in ket order (qubit 0 last), identities included.
    pub fn label(&self) -> String {
        (0..self.n_qubits).rev().map(|q| self.letter(q).as_char()).collect()
    }

    /// Phase and basis index of `P|b>`: `P|b> = phase * |b ^ x>`.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let sign = if ((b as u64) & self.z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (i_pow(self.y_count()) * sign, b ^ self.x as usize)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, l) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", l.as_char(), q)?;
            first = false;
        }
        Ok(())
    }
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::Invalid("qubit count must be positive".into()));
    }
    if n_qubits > MAX_STRING_QUBITS {
        return Err(Error::CapExceeded {
            what: "Pauli string",
            size: n_qubits,
            cap: MAX_STRING_QUBITS,
        });
    }
    Ok(())
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Operator product `a * b = phase * product`, with `phase` in `{1, i, -1, -i}`.
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<(Complex64, PauliString)> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::QubitMismatch {
            left: a.n_qubits,
            right: b.n_qubits,
        });
    }
    // Exponent of i accumulated over qubits where both letters are non-identity.
    let mut k: i32 = 0;
    let mut both = a.support() & b.support();
    while both != 0 {
        let q = both.trailing_zeros() as usize;
        both &= both - 1;
        k += match (a.letter(q), b.letter(q)) {
            (PauliLetter::X, PauliLetter::Y)
            | (PauliLetter::Y, PauliLetter::Z)
            | (PauliLetter::Z, PauliLetter::X) => 1,
            (PauliLetter::Y, PauliLetter::X)
            | (PauliLetter::Z, PauliLetter::Y)
            | (PauliLetter::X, PauliLetter::Z) => -1,
            _ => 0,
        };
    }
    let product = PauliString {
        n_qubits: a.n_qubits,
        x: a.x ^ b.x,
        z: a.z ^ b.z,
    };
    Ok((i_pow(k.rem_euclid(4) as u32), product))
}

/// True iff the full-support `measurement` basis agrees with `observable` on
/// every qubit of the observable's support.
pub fn hits(measurement: &PauliString, observable: &PauliString) -> Result<bool> {
    if measurement.n_qubits != observable.n_qubits {
        return Err(Error::QubitMismatch {
            left: measurement.n_qubits,
            right: observable.n_qubits,
        });
    }
    if !measurement.has_full_support() {
        let q = (!measurement.support()).trailing_zeros() as usize;
        return Err(Error::IdentityLetter { qubit: q });
    }
    Ok(hits_unchecked(measurement, observable))
}

#[inline]
pub(crate) fn hits_unchecked(measurement: &PauliString, observable: &PauliString) -> bool {
    let s = observable.support();
    (measurement.x & s) == observable.x && (measurement.z & s) == observable.z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

/// Real-weighted sum of distinct Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    /// Merges duplicate strings by adding coefficients and drops terms whose
    /// merged coefficient is below [`PRUNE_THRESHOLD`]. Order of first
    /// appearance is kept.
    pub fn new<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = PauliTerm>,
    {
        check_width(n_qubits)?;
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut merged: Vec<PauliTerm> = Vec::new();
        for t in terms {
            if t.string.n_qubits != n_qubits {
                return Err(Error::QubitMismatch {
                    left: n_qubits,
                    right: t.string.n_qubits,
                });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of {}", t.string)));
            }
            match index.get(&t.string) {
                Some(&k) => merged[k].coefficient += t.coefficient,
                None => {
                    index.insert(t.string, merged.len());
                    merged.push(t);
                }
            }
        }
        merged.retain(|t| t.coefficient.abs() >= PRUNE_THRESHOLD);
        Ok(PauliHamiltonian {
            n_qubits,
            terms: merged,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.coefficient)
            .sum()
    }

    /// Terms other than the identity, i.e. the ones that must be measured.
    pub fn observables(&self) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter().filter(|t| !t.string.is_identity())
    }

    pub fn coefficient_of(&self, s: &PauliString) -> Option<f64> {
        self.terms
            .iter()
            .find(|t| t.string == *s)
            .map(|t| t.coefficient)
    }

    /// Text form accepted by [`parse_hamiltonian`].
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits: {}\n", self.n_qubits);
        for t in &self.terms {
            out.push_str(&format!("{} {}\n", t.coefficient, t.string));
        }
        out
    }

    /// Dense `2^n x 2^n` matrix, within the default caps.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_within(&Limits::default())
    }

    pub fn to_matrix_within(&self, limits: &Limits) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > limits.matrix_qubits {
            return Err(Error::CapExceeded {
                what: "dense matrix",
                size: self.n_qubits,
                cap: limits.matrix_qubits,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            for b in 0..dim {
                let (phase, row) = t.string.apply_to_basis(b);
                m[(row, b)] += phase * t.coefficient;
            }
        }
        Ok(m)
    }

    /// Minimum eigenvalue of the dense matrix.
    pub fn ground_energy_exact(&self) -> Result<f64> {
        self.ground_energy_exact_within(&Limits::default())
    }

    pub fn ground_energy_exact_within(&self, limits: &Limits) -> Result<f64> {
        Ok(self.ground_state_within(limits)?.0)
    }

    /// Minimum eigenvalue together with a normalized eigenvector.
    pub fn ground_state(&self) -> Result<(f64, QuantumState)> {
        self.ground_state_within(&Limits::default())
    }

    pub fn ground_state_within(&self, limits: &Limits) -> Result<(f64, QuantumState)> {
        let m = self.to_matrix_within(limits)?;
        let eig = SymmetricEigen::new(m);
        let (k, e) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty spectrum");
        let v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
        Ok((e, QuantumState::from_amplitudes(v)?))
    }

    /// `<psi|H|psi>` evaluated term by term.
    pub fn expectation(&self, psi: &QuantumState) -> Result<f64> {
        let dim = 1usize << self.n_qubits;
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: psi.dim(),
            });
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { norm });
        }
        let value: Complex64 = self
            .terms
            .iter()
            .map(|t| {
                if t.string.is_identity() {
                    t.coefficient.into()
                } else {
                    pauli_expectation(&t.string, psi.amplitudes()) * t.coefficient
                }
            })
            .sum();
        if value.im.abs() >= 1e-10 {
            return Err(Error::NonHermitian { residue: value.im });
        }
        Ok(value.re)
    }

    /// Per-term expectations `<psi|P_s|psi>` (real parts), in term order.
    pub fn term_expectations(&self, psi: &QuantumState) -> Result<Vec<f64>> {
        let dim = 1usize << self.n_qubits;
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: psi.dim(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| pauli_expectation(&t.string, psi.amplitudes()).re)
            .collect())
    }
}

/// `<psi|P|psi>` for a single string.
pub fn pauli_expectation(p: &PauliString, amps: &[Complex64]) -> Complex64 {
    if p.is_identity() {
        return amps.iter().map(|a| a.norm_sqr()).sum::<f64>().into();
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, a) in amps.iter().enumerate() {
        let (phase, row) = p.apply_to_basis(b);
        acc += amps[row].conj() * phase * a;
    }
    acc
}

/// Parses the Hamiltonian text format:
///
/// ```text
/// # comment
/// qubits: 6
/// -0.19975 I
/// 0.01355 Z0 X1 X2 Z3
/// ```
pub fn parse_hamiltonian(text: &str) -> Result<PauliHamiltonian> {
    let mut n_qubits: Option<usize> = None;
    let mut terms = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(n) = n_qubits else {
            n_qubits = Some(parse_header(line, line_no)?);
            continue;
        };
        let mut tokens = tokens_with_columns(line);
        let (col, coeff_tok) = tokens.next().expect("non-empty line");
        let coefficient: f64 = coeff_tok
            .parse()
            .map_err(|_| Error::parse(line_no, col, format!("invalid coefficient `{coeff_tok}`")))?;
        if !coefficient.is_finite() {
            return Err(Error::parse(line_no, col, "coefficient must be finite"));
        }
        let rest: Vec<(usize, &str)> = tokens.collect();
        if rest.is_empty() {
            return Err(Error::parse(line_no, line.len() + 1, "missing Pauli term"));
        }
        let mut string = PauliString::identity(n)?;
        if !(rest.len() == 1 && rest[0].1 == "I") {
            for (col, tok) in rest {
                let mut chars = tok.chars();
                let letter = match chars.next().and_then(PauliLetter::from_char) {
                    Some(l) if l != PauliLetter::I => l,
                    _ => return Err(Error::parse(line_no, col, format!("invalid Pauli token `{tok}`"))),
                };
                let idx_str = chars.as_str();
                if idx_str.is_empty() || !idx_str.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::parse(line_no, col, format!("invalid qubit index in `{tok}`")));
                }
                let index: usize = idx_str
                    .parse()
                    .map_err(|_| Error::parse(line_no, col, format!("invalid qubit index in `{tok}`")))?;
                if index >= n {
                    return Err(Error::QubitIndex { index, n_qubits: n });
                }
                if string.letter(index) != PauliLetter::I {
                    return Err(Error::parse(line_no, col, format!("qubit {index} repeated in term")));
                }
                string.set(index, letter);
            }
        }
        terms.push(PauliTerm { coefficient, string });
    }
    let n = n_qubits.ok_or(Error::MissingHeader)?;
    PauliHamiltonian::new(n, terms)
}

fn parse_header(line: &str, line_no: usize) -> Result<usize> {
    let trimmed = line.trim();
    let Some(rest) = trimmed.strip_prefix("qubits:") else {
        return Err(Error::MissingHeader);
    };
    let value = rest.trim();
    let col = line.rfind(value).map_or(1, |i| i + 1);
    let n: usize = value
        .parse()
        .map_err(|_| Error::parse(line_no, col, format!("invalid qubit count `{value}`")))?;
    if n == 0 || n > MAX_STRING_QUBITS {
        return Err(Error::parse(
            line_no,
            col,
            format!("qubit count must be in 1..={MAX_STRING_QUBITS}"),
        ));
    }
    Ok(n)
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out.into_iter()
}
