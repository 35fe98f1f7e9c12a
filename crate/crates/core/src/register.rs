//! Atom registers, interaction matrices and register embedding.
//!
//! Positions are in micrometers and interaction strengths in rad/us. The
//! embedding compares the register matrix `C6/r^6` numerically against the
//! positive two-Z coefficients of a target Hamiltonian.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{derive_seed, map_indexed_with, Execution};
use crate::optimize::{nelder_mead, Bounds, OptimizerSettings};
use crate::pauli::{PauliHamiltonian, PauliLetter};

/// Default van der Waals coefficient, rad/us * um^6.
pub const DEFAULT_C6: f64 = 5_420_503.0;
/// Default resonant dipole coefficient, rad/us * um^3.
pub const DEFAULT_C3: f64 = 3_700.0;
/// Default minimum distance between two atoms, um.
pub const DEFAULT_MIN_SPACING: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionModel {
    /// `sum_{i>j} C6/r^6 n_i n_j`.
    Ising { c6: f64 },
    /// `sum_{i!=j} C3/r^3 (X_i X_j + Y_i Y_j)`.
    Xy { c3: f64 },
}

impl InteractionModel {
    pub fn ising() -> Self {
        InteractionModel::Ising { c6: DEFAULT_C6 }
    }

    pub fn xy() -> Self {
        InteractionModel::Xy { c3: DEFAULT_C3 }
    }

    fn validate(&self) -> Result<()> {
        let c = match *self {
            InteractionModel::Ising { c6 } => c6,
            InteractionModel::Xy { c3 } => c3,
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Invalid(format!("interaction coefficient must be positive, got {c}")));
        }
        Ok(())
    }

    /// Pair strength at distance `r`.
    pub fn strength(&self, r: f64) -> f64 {
        match *self {
            InteractionModel::Ising { c6 } => c6 / r.powi(6),
            InteractionModel::Xy { c3 } => c3 / r.powi(3),
        }
    }

    /// Distance at which the pair strength equals `v`.
    pub fn distance_for(&self, v: f64) -> f64 {
        match *self {
            InteractionModel::Ising { c6 } => (c6 / v).powf(1.0 / 6.0),
            InteractionModel::Xy { c3 } => (c3 / v).cbrt(),
        }
    }
}

/// Atom positions in the plane plus the interaction model they realize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Register {
    positions: Vec<[f64; 2]>,
    model: InteractionModel,
}

impl Register {
    pub fn new(positions: Vec<[f64; 2]>, model: InteractionModel) -> Result<Self> {
        Register::with_min_spacing(positions, model, DEFAULT_MIN_SPACING)
    }

    pub fn with_min_spacing(
        positions: Vec<[f64; 2]>,
        model: InteractionModel,
        min_spacing: f64,
    ) -> Result<Self> {
        model.validate()?;
        if positions.is_empty() {
            return Err(Error::Invalid("register needs at least one atom".into()));
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("atom coordinates".into()));
        }
        if let Some((i, j, d)) = closest_violation(&positions, min_spacing) {
            return Err(Error::Spacing {
                i,
                j,
                distance: d,
                min_spacing,
            });
        }
        Ok(Register { positions, model })
    }

    /// Re-checks the spacing constraint, e.g. after deserialization.
    pub fn validate(&self, min_spacing: f64) -> Result<()> {
        Register::with_min_spacing(self.positions.clone(), self.model, min_spacing).map(|_| ())
    }

    /// Atoms on a line with uniform spacing, starting at the origin.
    pub fn line(n: usize, spacing: f64, model: InteractionModel) -> Result<Self> {
        Register::new((0..n).map(|i| [i as f64 * spacing, 0.0]).collect(), model)
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn model(&self) -> InteractionModel {
        self.model
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.positions[i], self.positions[j])
    }

    pub fn min_distance(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in 0..i {
                best = best.min(self.distance(i, j));
            }
        }
        best
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn closest_violation(positions: &[[f64; 2]], min_spacing: f64) -> Option<(usize, usize, f64)> {
    for i in 0..positions.len() {
        for j in 0..i {
            let d = dist(positions[i], positions[j]);
            if d < min_spacing {
                return Some((j, i, d));
            }
        }
    }
    None
}

/// Symmetric pair-strength matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    n: usize,
    values: Vec<f64>,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        InteractionMatrix {
            n,
            values: vec![0.0; n * n],
        }
    }

    /// Builds from the strict upper triangle given by `f(i, j)`, `i < j`.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut m = InteractionMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                m.values[i * n + j] = v;
                m.values[j * n + i] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n.max(1))
    }
}

fn matrix_from_positions(positions: &[[f64; 2]], model: InteractionModel) -> InteractionMatrix {
    InteractionMatrix::from_fn(positions.len(), |i, j| {
        model.strength(dist(positions[i], positions[j]))
    })
}

/// Register matrix `V^R`: `C6/r^6` (Ising) or `C3/r^3` (XY) per pair.
pub fn interaction_matrix(r: &Register) -> Result<InteractionMatrix> {
    let n = r.len();
    for i in 0..n {
        for j in 0..i {
            if r.distance(i, j) == 0.0 {
                return Err(Error::Spacing {
                    i: j,
                    j: i,
                    distance: 0.0,
                    min_spacing: 0.0,
                });
            }
        }
    }
    Ok(matrix_from_positions(&r.positions, r.model))
}

/// Target matrix `V^T`: the positive coefficients of terms that are exactly
/// `Z_i Z_j`. Every other term is ignored.
pub fn target_matrix(h: &PauliHamiltonian, n_atoms: usize) -> Result<InteractionMatrix> {
    if n_atoms != h.n_qubits() {
        return Err(Error::QubitMismatch {
            left: n_atoms,
            right: h.n_qubits(),
        });
    }
    let mut m = InteractionMatrix::zeros(n_atoms);
    for t in h.terms() {
        let letters: Vec<_> = t.string.iter().collect();
        if let [(i, PauliLetter::Z), (j, PauliLetter::Z)] = letters[..] {
            if t.coefficient > 0.0 {
                m.values[i * n_atoms + j] = t.coefficient;
                m.values[j * n_atoms + i] = t.coefficient;
            }
        }
    }
    if m.is_zero() {
        log::warn!("target Hamiltonian has no positive two-Z terms; target matrix is zero");
    }
    Ok(m)
}

/// Sum over ordered pairs `i != j` of `(V^T_ij - V^R_ij)^2`.
pub fn embedding_score(vt: &InteractionMatrix, vr: &InteractionMatrix) -> Result<f64> {
    if vt.n != vr.n {
        return Err(Error::DimensionMismatch {
            expected: vt.n,
            got: vr.n,
        });
    }
    Ok(vt
        .values
        .iter()
        .zip(&vr.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingOptions {
    /// Simplex evaluations per start.
    pub max_evals: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub min_spacing: f64,
    /// Penalty weight is this factor times `max(V^T)` (at least 1).
    pub penalty_factor: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        EmbeddingOptions {
            max_evals: 3000,
            n_starts: 10,
            seed: 0,
            min_spacing: DEFAULT_MIN_SPACING,
            penalty_factor: 1e3,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    pub register: Register,
    pub score: f64,
    /// Objective values (score plus spacing penalty) of the winning start,
    /// in evaluation order.
    pub trace: Vec<f64>,
    /// Index of the start that won; 0 is the supplied initial register.
    pub best_start: usize,
    /// False when no candidate respected the spacing constraint and the
    /// initial register was returned unchanged.
    pub feasible: bool,
}

/// Moves atoms so the register matrix approaches `vt`.
///
/// Start 0 is `init`; the other starts scatter atoms uniformly over a square
/// sized from the target distances. Each start runs Nelder-Mead on the flat
/// coordinate vector with a quadratic spacing penalty, and only candidates
/// that satisfy the spacing constraint can be returned.
pub fn optimize_register(
    vt: &InteractionMatrix,
    init: &Register,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingResult> {
    let n = init.len();
    if vt.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: vt.n,
        });
    }
    if opts.max_evals == 0 || opts.n_starts == 0 {
        return Err(Error::Budget("embedding needs at least one start and one evaluation".into()));
    }
    let model = init.model;
    let min_spacing = opts.min_spacing;
    let init_score = embedding_score(vt, &matrix_from_positions(&init.positions, model))?;
    if n == 1 {
        return Ok(EmbeddingResult {
            register: init.clone(),
            score: init_score,
            trace: vec![init_score],
            best_start: 0,
            feasible: true,
        });
    }

    let lambda = opts.penalty_factor * vt.max().max(1.0);
    let positive: Vec<f64> = vt.values.iter().copied().filter(|&v| v > 0.0).collect();
    let typical = if positive.is_empty() {
        4.0 * min_spacing
    } else {
        model
            .distance_for(positive.iter().sum::<f64>() / positive.len() as f64)
            .max(min_spacing)
    };
    let centroid = [
        init.positions.iter().map(|p| p[0]).sum::<f64>() / n as f64,
        init.positions.iter().map(|p| p[1]).sum::<f64>() / n as f64,
    ];
    let span = init
        .positions
        .iter()
        .map(|p| (p[0] - centroid[0]).abs().max((p[1] - centroid[1]).abs()))
        .fold(0.0, f64::max);
    let scatter = (typical * (n as f64).sqrt()).max(span);
    let half_box = 10.0 * scatter.max(typical) + span;
    let bounds = Bounds::new(
        (0..2 * n).map(|k| centroid[k % 2] - half_box).collect(),
        (0..2 * n).map(|k| centroid[k % 2] + half_box).collect(),
    )?;

    let objective = |x: &[f64]| -> f64 {
        let pos: Vec<[f64; 2]> = x.chunks(2).map(|c| [c[0], c[1]]).collect();
        let vr = matrix_from_positions(&pos, model);
        let score: f64 = vt.values.iter().zip(&vr.values).map(|(a, b)| (a - b) * (a - b)).sum();
        let mut penalty = 0.0;
        for i in 0..n {
            for j in 0..i {
                let gap = min_spacing - dist(pos[i], pos[j]);
                if gap > 0.0 {
                    penalty += gap * gap;
                }
            }
        }
        score + lambda * penalty
    };

    let runs = map_indexed_with(opts.execution, opts.n_starts, |k| {
        let start: Vec<f64> = if k == 0 {
            init.positions.iter().flat_map(|p| [p[0], p[1]]).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, k as u64));
            (0..2 * n)
                .map(|c| centroid[c % 2] + scatter * (rng.random::<f64>() - 0.5))
                .collect()
        };
        let settings = OptimizerSettings {
            max_evals: opts.max_evals,
            seed: derive_seed(opts.seed, k as u64),
            simplex_scale: 0.02,
            ..OptimizerSettings::default()
        };
        let mut f = objective;
        let result = nelder_mead(&mut f, &start, &bounds, &settings)?;
        // Best evaluated candidate that honours the spacing constraint.
        let best = result
            .trace
            .iter()
            .filter_map(|e| {
                let pos: Vec<[f64; 2]> = e.params.chunks(2).map(|c| [c[0], c[1]]).collect();
                if closest_violation(&pos, min_spacing).is_some() {
                    return None;
                }
                let score = embedding_score(vt, &matrix_from_positions(&pos, model)).ok()?;
                Some((pos, score))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let trace: Vec<f64> = result.trace.iter().map(|e| e.value).collect();
        Ok::<_, Error>((best, trace))
    });

    let mut winner: Option<(usize, Vec<[f64; 2]>, f64, Vec<f64>)> = None;
    for (k, run) in runs.into_iter().enumerate() {
        let (best, trace) = run?;
        if let Some((pos, score)) = best {
            if winner.as_ref().is_none_or(|w| score < w.2) {
                winner = Some((k, pos, score, trace));
            }
        }
    }
    match winner {
        Some((k, pos, score, trace)) if score <= init_score => Ok(EmbeddingResult {
            register: Register::with_min_spacing(pos, model, min_spacing)?,
            score,
            trace,
            best_start: k,
            feasible: true,
        }),
        Some(_) => Ok(EmbeddingResult {
            register: init.clone(),
            score: init_score,
            trace: vec![init_score],
            best_start: 0,
            feasible: true,
        }),
        None => Ok(EmbeddingResult {
            register: init.clone(),
            score: init_score,
            trace: vec![init_score],
            best_start: 0,
            feasible: false,
        }),
    }
}
