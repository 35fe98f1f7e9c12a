//! Shot sampling in rotated Pauli bases and derandomized measurement plans.
//!
//! An outcome is stored as a bit mask over qubits; bit `j` set means qubit
//! `j` read `1`, i.e. eigenvalue `-1` of the measured letter.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::QuantumState;
use crate::error::{Error, Result};
use crate::exec::{derive_seed, map_indexed_with, Execution};
use crate::pauli::{hits_unchecked, PauliHamiltonian, PauliLetter, PauliString};

/// A full-support Pauli string used as a measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MeasurementBasis(PauliString);

impl MeasurementBasis {
    pub fn new(letters: PauliString) -> Result<Self> {
        if let Some(q) = (0..letters.n_qubits()).find(|&q| letters.letter(q) == PauliLetter::I) {
            return Err(Error::IdentityLetter { qubit: q });
        }
        Ok(MeasurementBasis(letters))
    }

    /// Parses a ket-order label such as `"ZXZ"`.
    pub fn from_label(label: &str) -> Result<Self> {
        MeasurementBasis::new(PauliString::from_label(label)?)
    }

    pub fn uniform(n_qubits: usize, letter: PauliLetter) -> Result<Self> {
        MeasurementBasis::new(PauliString::from_letters(
            n_qubits,
            (0..n_qubits).map(|q| (q, letter)),
        )?)
    }

    pub fn letters(&self) -> &PauliString {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    pub fn hits(&self, observable: &PauliString) -> bool {
        observable.n_qubits() == self.n_qubits() && hits_unchecked(&self.0, observable)
    }
}

impl TryFrom<String> for MeasurementBasis {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        MeasurementBasis::from_label(&s)
    }
}

impl From<MeasurementBasis> for String {
    fn from(b: MeasurementBasis) -> Self {
        b.0.label()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotBatch {
    pub basis: MeasurementBasis,
    pub outcomes: Vec<u64>,
}

impl ShotBatch {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Outcome counts, sorted by outcome.
    pub fn histogram(&self) -> Vec<(u64, usize)> {
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for &o in &self.outcomes {
            *counts.entry(o).or_default() += 1;
        }
        let mut v: Vec<_> = counts.into_iter().collect();
        v.sort_unstable();
        v
    }
}

/// Rotates `amps` in place so that measuring every qubit in Z realizes
/// `basis`: `H` for X and `H S^dagger` for Y.
pub fn rotate_into_basis(amps: &mut [Complex64], basis: &MeasurementBasis) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (q, letter) in basis.letters().iter() {
        if letter == PauliLetter::Z {
            continue;
        }
        let bit = 1usize << q;
        for b in 0..amps.len() {
            if b & bit != 0 {
                continue;
            }
            let a0 = amps[b];
            let mut a1 = amps[b | bit];
            if letter == PauliLetter::Y {
                a1 *= Complex64::new(0.0, -1.0);
            }
            amps[b] = (a0 + a1) * h;
            amps[b | bit] = (a0 - a1) * h;
        }
    }
}

/// Born-rule shots of `state` measured in `basis`, reproducible from `seed`.
pub fn sample(
    state: &QuantumState,
    basis: &MeasurementBasis,
    n_shots: usize,
    seed: u64,
) -> Result<ShotBatch> {
    if state.dim() != 1usize << basis.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1usize << basis.n_qubits(),
            got: state.dim(),
        });
    }
    let mut amps = state.amplitudes().to_vec();
    rotate_into_basis(&mut amps, basis);
    let mut cdf = Vec::with_capacity(amps.len());
    let mut acc = 0.0;
    for a in &amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..n_shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= u).min(amps.len() - 1);
            k as u64
        })
        .collect();
    Ok(ShotBatch {
        basis: *basis,
        outcomes,
    })
}

/// Ordered measurement bases with per-basis shot counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerandomizedPlan {
    pub epsilon: f64,
    pub bases: Vec<MeasurementBasis>,
    pub repetitions: Vec<usize>,
}

impl DerandomizedPlan {
    /// Builds a canonical plan: duplicate bases are merged by summing their
    /// repetitions, keeping first-appearance order.
    pub fn new(epsilon: f64, bases: Vec<MeasurementBasis>, repetitions: Vec<usize>) -> Result<Self> {
        if bases.len() != repetitions.len() {
            return Err(Error::DimensionMismatch {
                expected: bases.len(),
                got: repetitions.len(),
            });
        }
        if bases.is_empty() {
            return Err(Error::Invalid("measurement plan has no bases".into()));
        }
        let n = bases[0].n_qubits();
        if let Some(b) = bases.iter().find(|b| b.n_qubits() != n) {
            return Err(Error::QubitMismatch {
                left: n,
                right: b.n_qubits(),
            });
        }
        if repetitions.contains(&0) {
            return Err(Error::Invalid("every basis needs at least one shot".into()));
        }
        let mut index: HashMap<MeasurementBasis, usize> = HashMap::new();
        let mut merged_bases = Vec::new();
        let mut merged_reps: Vec<usize> = Vec::new();
        for (b, r) in bases.into_iter().zip(repetitions) {
            match index.get(&b) {
                Some(&k) => merged_reps[k] += r,
                None => {
                    index.insert(b, merged_bases.len());
                    merged_bases.push(b);
                    merged_reps.push(r);
                }
            }
        }
        Ok(DerandomizedPlan {
            epsilon,
            bases: merged_bases,
            repetitions: merged_reps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.bases[0].n_qubits()
    }

    pub fn n_distinct(&self) -> usize {
        self.bases.len()
    }

    pub fn total_shots(&self) -> usize {
        self.repetitions.iter().sum()
    }

    /// True when every observable is hit by at least one basis.
    pub fn covers<'a, I: IntoIterator<Item = &'a PauliString>>(&self, observables: I) -> bool {
        observables
            .into_iter()
            .all(|o| self.bases.iter().any(|b| b.hits(o)))
    }
}

/// Non-identity terms of `h` as (string, coefficient) pairs.
pub fn observables_of(h: &PauliHamiltonian) -> Vec<(PauliString, f64)> {
    h.observables().map(|t| (t.string, t.coefficient)).collect()
}

fn normalized_weights(observables: &[(PauliString, f64)]) -> Vec<f64> {
    let total: f64 = observables.iter().map(|(_, c)| c.abs()).sum();
    if total == 0.0 {
        return vec![1.0 / observables.len() as f64; observables.len()];
    }
    observables.iter().map(|(_, c)| c.abs() / total).collect()
}

fn check_observables(observables: &[(PauliString, f64)], n_qubits: usize) -> Result<()> {
    for (o, c) in observables {
        if o.is_identity() {
            return Err(Error::IdentityObservable);
        }
        if o.n_qubits() != n_qubits {
            return Err(Error::QubitMismatch {
                left: n_qubits,
                right: o.n_qubits(),
            });
        }
        if !c.is_finite() {
            return Err(Error::NonFinite("observable weight".into()));
        }
    }
    Ok(())
}

/// `nu = 1 - exp(-epsilon^2 / 2)`.
pub fn confidence_nu(epsilon: f64) -> f64 {
    1.0 - (-epsilon * epsilon / 2.0).exp()
}

/// Greedy derandomization; returns the plan (each of the `max_bases`
/// settings with one repetition, merged) and the cost after every letter.
pub fn derandomize_traced(
    observables: &[(PauliString, f64)],
    n_qubits: usize,
    max_bases: usize,
    epsilon: f64,
) -> Result<(DerandomizedPlan, Vec<f64>)> {
    check_observables(observables, n_qubits)?;
    if max_bases == 0 {
        return Err(Error::Budget("derandomization needs at least one basis".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if observables.is_empty() {
        let z = MeasurementBasis::uniform(n_qubits, PauliLetter::Z)?;
        return Ok((DerandomizedPlan::new(epsilon, vec![z], vec![max_bases])?, vec![0.0]));
    }
    let nu = confidence_nu(epsilon);
    let w = normalized_weights(observables);
    let weight: Vec<u32> = observables.iter().map(|(o, _)| o.weight() as u32).collect();
    // Contribution of one fully unassigned basis.
    let blank: Vec<f64> = weight
        .iter()
        .map(|&k| 1.0 - nu * 3f64.powi(-(k as i32)))
        .collect();
    let mut done = vec![1.0; observables.len()];
    let mut bases = Vec::with_capacity(max_bases);
    let mut trace = Vec::with_capacity(max_bases * n_qubits);
    const ORDER: [PauliLetter; 3] = [PauliLetter::Z, PauliLetter::X, PauliLetter::Y];

    for m in 0..max_bases {
        let remaining = (max_bases - m - 1) as i32;
        let tail: Vec<f64> = blank.iter().map(|b| b.powi(remaining)).collect();
        // Per observable: still consistent with the current basis, and the
        // number of its qubits not yet assigned.
        let mut alive = vec![true; observables.len()];
        let mut open: Vec<u32> = weight.clone();
        let mut current = PauliString::identity(n_qubits)?;
        let cost_with = |alive: &[bool], open: &[u32]| -> f64 {
            (0..observables.len())
                .map(|s| {
                    let q = if alive[s] { 3f64.powi(-(open[s] as i32)) } else { 0.0 };
                    w[s] * done[s] * (1.0 - nu * q) * tail[s]
                })
                .sum()
        };
        for j in 0..n_qubits {
            let mut best: Option<(PauliLetter, f64)> = None;
            for letter in ORDER {
                let mut a = alive.clone();
                let mut o = open.clone();
                for (s, (obs, _)) in observables.iter().enumerate() {
                    let l = obs.letter(j);
                    if l != PauliLetter::I {
                        o[s] -= 1;
                        if l != letter {
                            a[s] = false;
                        }
                    }
                }
                let cost = cost_with(&a, &o);
                if best.is_none_or(|(_, c)| cost < c) {
                    best = Some((letter, cost));
                }
            }
            let (letter, cost) = best.expect("three candidates");
            current.set(j, letter);
            for (s, (obs, _)) in observables.iter().enumerate() {
                let l = obs.letter(j);
                if l != PauliLetter::I {
                    open[s] -= 1;
                    if l != letter {
                        alive[s] = false;
                    }
                }
            }
            trace.push(cost);
        }
        for s in 0..observables.len() {
            if alive[s] {
                done[s] *= 1.0 - nu;
            }
        }
        bases.push(MeasurementBasis::new(current)?);
    }
    let reps = vec![1; bases.len()];
    Ok((DerandomizedPlan::new(epsilon, bases, reps)?, trace))
}

/// Greedy letter-by-letter derandomization over `max_bases` settings.
///
/// The cost is `sum_s w_s prod_m (1 - nu q_{m,s})` with `w_s = |c_s| / sum |c|`,
/// where `q_{m,s}` is 1 for a hitting basis, 0 for a missing one and `3^-k`
/// for `k` still unassigned qubits in the support of `s`. Ties prefer Z,
/// then X, then Y.
pub fn derandomize(
    observables: &[(PauliString, f64)],
    n_qubits: usize,
    max_bases: usize,
    epsilon: f64,
) -> Result<DerandomizedPlan> {
    Ok(derandomize_traced(observables, n_qubits, max_bases, epsilon)?.0)
}

/// Doubles the number of settings, starting at `start`, until every
/// observable is hit; gives up at `max_bases`.
pub fn derandomize_covering(
    observables: &[(PauliString, f64)],
    n_qubits: usize,
    start: usize,
    max_bases: usize,
    epsilon: f64,
) -> Result<DerandomizedPlan> {
    let mut m = start.max(1);
    loop {
        let plan = derandomize(observables, n_qubits, m, epsilon)?;
        if plan.covers(observables.iter().map(|(o, _)| o)) {
            return Ok(plan);
        }
        if m >= max_bases {
            return Err(Error::Budget(format!(
                "{max_bases} measurement settings do not cover every observable"
            )));
        }
        m = (2 * m).min(max_bases);
    }
}

/// Uniformly random full-support bases, for comparison with derandomized plans.
pub fn random_plan(n_qubits: usize, n_bases: usize, epsilon: f64, seed: u64) -> Result<DerandomizedPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const LETTERS: [PauliLetter; 3] = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z];
    let bases = (0..n_bases)
        .map(|_| {
            let s = PauliString::from_letters(
                n_qubits,
                (0..n_qubits).map(|q| (q, LETTERS[rng.random_range(0..3)])),
            )?;
            MeasurementBasis::new(s)
        })
        .collect::<Result<Vec<_>>>()?;
    DerandomizedPlan::new(epsilon, bases, vec![1; n_bases])
}

/// Splits `budget` shots over the plan's bases in proportion to the weight
/// of observables each one hits.
///
/// Every basis first receives one shot; the rest is divided proportionally
/// and rounded by largest remainder (ties to the earlier basis). Bases that
/// hit nothing get only their single shot unless no basis hits anything, in
/// which case the split is uniform.
pub fn allocate_shots(
    plan: &DerandomizedPlan,
    budget: usize,
    observables: &[(PauliString, f64)],
) -> Result<DerandomizedPlan> {
    let b = plan.n_distinct();
    if budget < b {
        return Err(Error::Budget(format!(
            "budget of {budget} shots is smaller than the {b} distinct bases"
        )));
    }
    check_observables(observables, plan.n_qubits())?;
    let w = if observables.is_empty() {
        Vec::new()
    } else {
        normalized_weights(observables)
    };
    let mut scores: Vec<f64> = plan
        .bases
        .iter()
        .map(|basis| {
            observables
                .iter()
                .zip(&w)
                .filter(|((o, _), _)| basis.hits(o))
                .map(|(_, w)| w)
                .sum()
        })
        .collect();
    if scores.iter().all(|&s| s == 0.0) {
        scores = vec![1.0; b];
    }
    let reps = largest_remainder(&scores, budget - b);
    DerandomizedPlan::new(plan.epsilon, plan.bases.clone(), reps.iter().map(|r| r + 1).collect())
}

/// Integer apportionment of `total` proportional to `scores`.
fn largest_remainder(scores: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = scores.iter().sum();
    let quotas: Vec<f64> = scores.iter().map(|s| s / sum * total as f64).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(total.saturating_sub(assigned)) {
        out[k] += 1;
    }
    out
}

/// Samples every basis of `plan` with its repetition count. Basis `k` uses
/// the seed `derive_seed(seed, k)`.
pub fn measure_plan(
    state: &QuantumState,
    plan: &DerandomizedPlan,
    seed: u64,
    exec: Execution,
) -> Result<Vec<ShotBatch>> {
    map_indexed_with(exec, plan.n_distinct(), |k| {
        sample(state, &plan.bases[k], plan.repetitions[k], derive_seed(seed, k as u64))
    })
    .into_iter()
    .collect()
}

fn parity(outcome: u64, support: u64) -> f64 {
    if (outcome & support).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Mean of `prod_j (-1)^{bit_j}` over the support of `observable`, taken over
/// every shot whose basis hits it, and the number of such shots. Returns
/// `(0, 0)` when nothing hits.
pub fn empirical_average(batches: &[ShotBatch], observable: &PauliString) -> (f64, usize) {
    let support = observable.support();
    let mut sum = 0.0;
    let mut n = 0usize;
    for batch in batches {
        if !batch.basis.hits(observable) {
            continue;
        }
        for &o in &batch.outcomes {
            sum += parity(o, support);
        }
        n += batch.outcomes.len();
    }
    if n == 0 {
        (0.0, 0)
    } else {
        (sum / n as f64, n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    pub energy: f64,
    /// Index into `h.terms()` for every non-identity term, in term order.
    pub term_indices: Vec<usize>,
    /// Empirical average for each entry of `term_indices`.
    pub per_term: Vec<f64>,
    /// Hitting shots for each entry of `term_indices`.
    pub hits: Vec<usize>,
    /// Term indices (into `h.terms()`) that no shot measured.
    pub uncovered: Vec<usize>,
    pub shots: usize,
}

/// `c_I + sum_s c_s omega_s` over covered terms; uncovered terms add nothing.
pub fn estimate_energy(h: &PauliHamiltonian, batches: &[ShotBatch]) -> Result<EnergyEstimate> {
    for b in batches {
        if b.basis.n_qubits() != h.n_qubits() {
            return Err(Error::QubitMismatch {
                left: h.n_qubits(),
                right: b.basis.n_qubits(),
            });
        }
    }
    let histograms: Vec<_> = batches.iter().map(|b| (b.basis, b.histogram(), b.len())).collect();
    let mut est = EnergyEstimate {
        energy: h.identity_coefficient(),
        term_indices: Vec::new(),
        per_term: Vec::new(),
        hits: Vec::new(),
        uncovered: Vec::new(),
        shots: batches.iter().map(|b| b.len()).sum(),
    };
    for (i, t) in h.terms().iter().enumerate() {
        if t.string.is_identity() {
            continue;
        }
        let support = t.string.support();
        let mut sum = 0.0;
        let mut n = 0usize;
        for (basis, hist, len) in &histograms {
            if basis.hits(&t.string) {
                sum += hist.iter().map(|&(o, c)| parity(o, support) * c as f64).sum::<f64>();
                n += len;
            }
        }
        let omega = if n == 0 { 0.0 } else { sum / n as f64 };
        if n == 0 {
            est.uncovered.push(i);
        } else {
            est.energy += t.coefficient * omega;
        }
        est.term_indices.push(i);
        est.per_term.push(omega);
        est.hits.push(n);
    }
    Ok(est)
}

/// Measures every non-identity term separately with `shots_per_term` shots,
/// in a basis that equals the term on its support and Z elsewhere. Costs
/// `shots_per_term` times the number of such terms.
pub fn estimate_per_term(
    h: &PauliHamiltonian,
    state: &QuantumState,
    shots_per_term: usize,
    seed: u64,
    exec: Execution,
) -> Result<EnergyEstimate> {
    let terms: Vec<_> = h.observables().map(|t| t.string).collect();
    let batches = map_indexed_with(exec, terms.len(), |k| {
        let s = terms[k];
        let filled = PauliString::from_letters(
            s.n_qubits(),
            (0..s.n_qubits()).map(|q| match s.letter(q) {
                PauliLetter::I => (q, PauliLetter::Z),
                l => (q, l),
            }),
        )?;
        sample(state, &MeasurementBasis::new(filled)?, shots_per_term, derive_seed(seed, k as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    // Each term only uses its own batch.
    let mut est = EnergyEstimate {
        energy: h.identity_coefficient(),
        term_indices: Vec::new(),
        per_term: Vec::new(),
        hits: Vec::new(),
        uncovered: Vec::new(),
        shots: shots_per_term * terms.len(),
    };
    let mut k = 0;
    for (i, t) in h.terms().iter().enumerate() {
        if t.string.is_identity() {
            continue;
        }
        let (omega, n) = empirical_average(std::slice::from_ref(&batches[k]), &t.string);
        k += 1;
        if n == 0 {
            est.uncovered.push(i);
        } else {
            est.energy += t.coefficient * omega;
        }
        est.term_indices.push(i);
        est.per_term.push(omega);
        est.hits.push(n);
    }
    Ok(est)
}
