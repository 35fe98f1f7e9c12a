//! Variational loops: UCC-XY, alternating and phase-segment baselines,
//! iterative pulse splitting, and the product-state warm-start scan.
//!
//! Every driver records each energy evaluation in a [`VqeTrace`]. Sampled
//! evaluations draw their shots from `derive_seed(seed, evaluation index)`,
//! so a run replays exactly from its configuration.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    evolve_within, format_bitstring, prepare_product_state_within, ucc_xy_state, DriveSegment,
    PulseSequence, QuantumState, ZConvention, DEFAULT_MIN_SEGMENT,
};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, map_indexed_with, Execution};
use crate::measurement::{
    allocate_shots, derandomize, estimate_energy, estimate_per_term, measure_plan, observables_of,
    DerandomizedPlan,
};
use crate::optimize::{
    minimize, nelder_mead, Bounds, Objective, OptimizerKind, OptimizerSettings,
};
use crate::pauli::PauliHamiltonian;
use crate::register::{InteractionModel, Register};
use crate::Limits;

/// `|e_exact - e_est| / |e_exact|`.
pub fn relative_error(e_exact: f64, e_est: f64) -> Result<f64> {
    if e_exact == 0.0 {
        return Err(Error::Invalid("relative error undefined for a zero reference".into()));
    }
    Ok((e_exact - e_est).abs() / e_exact.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ansatz {
    UccXy,
    AlternatingAb,
    PhaseSegments,
    #[default]
    IterativeSplit,
}

/// Closed parameter intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamBounds {
    /// Rabi frequency, rad/us.
    pub omega: (f64, f64),
    /// Detuning, rad/us; also bounds the local UCC-XY detunings.
    pub delta: (f64, f64),
    /// Segment durations of the alternating and phase ansatze, us.
    pub duration: (f64, f64),
    /// Evolution time of the UCC-XY state, us.
    pub ucc_time: (f64, f64),
    /// Drive phase, rad.
    pub phase: (f64, f64),
}

impl Default for ParamBounds {
    fn default() -> Self {
        ParamBounds {
            omega: (0.0, 4.0 * PI),
            delta: (-4.0 * PI, 4.0 * PI),
            duration: (DEFAULT_MIN_SEGMENT, 1.0),
            ucc_time: (0.0, 8.0),
            phase: (-PI, PI),
        }
    }
}

impl ParamBounds {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("omega", self.omega),
            ("delta", self.delta),
            ("duration", self.duration),
            ("ucc_time", self.ucc_time),
            ("phase", self.phase),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Invalid(format!("bounds for {name} are not ordered: [{lo}, {hi}]")));
            }
        }
        if self.omega.0 < 0.0 {
            return Err(Error::Invalid("Rabi frequency bounds must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub ansatz: Ansatz,
    pub optimizer: OptimizerKind,
    /// Stop once another evaluation would exceed this many shots.
    pub shot_budget_total: usize,
    /// Shots per energy evaluation with a derandomized plan.
    pub shots_per_energy: usize,
    /// Shots per Pauli term in the alternating and phase baselines.
    pub shots_per_term: usize,
    /// Optimizer evaluations per splitting pass.
    pub evals_per_iteration: usize,
    /// Evaluation cap for the single-pass ansatze and, in exact mode, for
    /// iterative splitting (as `max_iterations` passes).
    pub max_evals: usize,
    pub max_iterations: usize,
    pub t_tot: f64,
    pub min_segment: f64,
    pub bounds: ParamBounds,
    pub seed: u64,
    /// Evaluate `<psi|H|psi>` directly instead of sampling; costs no shots.
    pub exact_mode: bool,
    /// Seed each evaluation's shots from its evaluation index. When off,
    /// seeds come from one stream per run.
    pub common_random_numbers: bool,
    /// Derandomization accuracy parameter.
    pub epsilon: f64,
    /// Measurement settings considered by derandomization before merging.
    pub plan_settings: usize,
    /// Layers of the alternating ansatz or segments of the phase ansatz.
    pub layers: usize,
    /// Fixed Rabi frequency of the baseline ansatze, rad/us.
    pub drive_omega: f64,
    /// Fixed detuning of `H_a` in the alternating ansatz, rad/us.
    pub drive_delta: f64,
    /// Initial bitstring (ket order) for the baselines; all zeros if absent.
    pub init_state: Option<String>,
    /// Seeds averaged per product state in the warm-start scan.
    pub n_repeats: usize,
    /// Differential-evolution population.
    pub population: usize,
    /// In exact mode, refine the UCC-XY optimum with Nelder-Mead.
    pub polish: bool,
    pub limits: Limits,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            ansatz: Ansatz::default(),
            optimizer: OptimizerKind::Powell,
            shot_budget_total: 350_000,
            shots_per_energy: 1000,
            shots_per_term: 1000,
            evals_per_iteration: 20,
            max_evals: 400,
            max_iterations: 30,
            t_tot: 4.0,
            min_segment: DEFAULT_MIN_SEGMENT,
            bounds: ParamBounds::default(),
            seed: 0,
            exact_mode: false,
            common_random_numbers: true,
            epsilon: 0.1,
            plan_settings: 1000,
            layers: 3,
            drive_omega: 2.0 * PI,
            drive_delta: 2.0 * PI,
            init_state: None,
            n_repeats: 1,
            population: 15,
            polish: true,
            limits: Limits::default(),
            execution: Execution::default(),
        }
    }
}

impl VqeConfig {
    /// Defaults for the UCC-XY protocol: differential evolution over
    /// 36,500 shots.
    pub fn ucc_xy() -> Self {
        VqeConfig {
            ansatz: Ansatz::UccXy,
            optimizer: OptimizerKind::DifferentialEvolution,
            shot_budget_total: 36_500,
            // 73 evaluations: the initial population plus about four generations.
            shots_per_energy: 500,
            ..VqeConfig::default()
        }
    }

    pub fn alternating() -> Self {
        VqeConfig {
            ansatz: Ansatz::AlternatingAb,
            optimizer: OptimizerKind::NelderMead,
            shot_budget_total: 2_000_000,
            ..VqeConfig::default()
        }
    }

    pub fn phase_segments() -> Self {
        VqeConfig {
            ansatz: Ansatz::PhaseSegments,
            ..VqeConfig::alternating()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if self.shot_budget_total == 0 || self.shots_per_energy == 0 || self.shots_per_term == 0 {
            return Err(Error::Budget("shot budgets must be positive".into()));
        }
        if !(self.t_tot.is_finite() && self.t_tot > 0.0) {
            return Err(Error::Invalid("t_tot must be positive".into()));
        }
        if !(self.min_segment.is_finite() && self.min_segment > 0.0) {
            return Err(Error::Invalid("min_segment must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Invalid("epsilon must lie in (0, 1)".into()));
        }
        if self.plan_settings == 0 || self.population < 4 {
            return Err(Error::Invalid("plan_settings must be positive and population at least 4".into()));
        }
        Ok(())
    }

    fn optimizer_settings(&self, max_evals: usize, seed: u64) -> OptimizerSettings {
        OptimizerSettings {
            max_evals,
            seed,
            population: self.population,
            ..OptimizerSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeRecord {
    /// Optimizer pass (always 0 for single-pass ansatze).
    pub iteration: usize,
    pub evaluation: usize,
    pub params: Vec<f64>,
    pub energy_estimate: f64,
    /// `<psi|H|psi>` of the evaluated state, for diagnostics.
    pub exact_energy: f64,
    pub cumulative_shots: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    SplitSaturated,
    MaxIterations,
    Converged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeTrace {
    pub records: Vec<VqeRecord>,
    /// Lowest recorded estimate.
    pub best_energy: f64,
    pub best_parameters: Vec<f64>,
    /// Exact energy of the state behind `best_energy`.
    pub best_exact_energy: f64,
    pub stop: StopReason,
    /// Pulse parameters at the end of iterative splitting.
    pub final_pulse: Option<PulseParams>,
}

impl VqeTrace {
    fn from_records(records: Vec<VqeRecord>, stop: StopReason, final_pulse: Option<PulseParams>) -> Self {
        let best = records
            .iter()
            .min_by(|a, b| a.energy_estimate.total_cmp(&b.energy_estimate));
        VqeTrace {
            best_energy: best.map_or(f64::NAN, |r| r.energy_estimate),
            best_parameters: best.map_or_else(Vec::new, |r| r.params.clone()),
            best_exact_energy: best.map_or(f64::NAN, |r| r.exact_energy),
            records,
            stop,
            final_pulse,
        }
    }

    pub fn total_shots(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_shots)
    }

    /// Running minimum of the estimates.
    pub fn running_best(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.min(r.energy_estimate);
                best
            })
            .collect()
    }

    /// Cumulative shots at which the running best first comes within
    /// `tolerance` relative error of `e_exact`.
    pub fn shots_to_tolerance(&self, e_exact: f64, tolerance: f64) -> Option<usize> {
        self.running_best()
            .iter()
            .zip(&self.records)
            .find(|(b, _)| relative_error(e_exact, **b).is_ok_and(|e| e < tolerance))
            .map(|(_, r)| r.cumulative_shots)
    }
}

/// How energies are obtained from prepared states.
enum Estimator {
    Exact,
    Plan(DerandomizedPlan),
    PerTerm(usize),
}

impl Estimator {
    fn derandomized(h: &PauliHamiltonian, cfg: &VqeConfig) -> Result<Self> {
        if cfg.exact_mode {
            return Ok(Estimator::Exact);
        }
        let obs = observables_of(h);
        if obs.is_empty() {
            return Ok(Estimator::Exact);
        }
        let plan = derandomize(&obs, h.n_qubits(), cfg.plan_settings, cfg.epsilon)?;
        let budget = cfg.shots_per_energy.max(plan.n_distinct());
        Ok(Estimator::Plan(allocate_shots(&plan, budget, &obs)?))
    }

    fn per_term(h: &PauliHamiltonian, cfg: &VqeConfig) -> Self {
        if cfg.exact_mode || h.observables().next().is_none() {
            Estimator::Exact
        } else {
            Estimator::PerTerm(cfg.shots_per_term)
        }
    }

    /// Shots charged per evaluation.
    fn cost(&self, h: &PauliHamiltonian) -> usize {
        match self {
            Estimator::Exact => 0,
            Estimator::Plan(p) => p.total_shots(),
            Estimator::PerTerm(s) => s * h.observables().count(),
        }
    }

    /// (estimate, exact) energies.
    fn energy(&self, h: &PauliHamiltonian, psi: &QuantumState, seed: u64) -> Result<(f64, f64)> {
        let exact = h.expectation(psi)?;
        let estimate = match self {
            Estimator::Exact => exact,
            Estimator::Plan(plan) => {
                let batches = measure_plan(psi, plan, seed, Execution::Sequential)?;
                estimate_energy(h, &batches)?.energy
            }
            Estimator::PerTerm(s) => estimate_per_term(h, psi, *s, seed, Execution::Sequential)?.energy,
        };
        Ok((estimate, exact))
    }
}

/// Objective adapter: prepares a state from parameters, estimates its energy
/// and records the evaluation. Batches prepare and measure in parallel.
struct Evaluator<'a, P> {
    h: &'a PauliHamiltonian,
    prepare: P,
    estimator: &'a Estimator,
    cost: usize,
    seed: u64,
    crn: bool,
    stream: ChaCha8Rng,
    iteration: usize,
    records: &'a mut Vec<VqeRecord>,
    start: Instant,
    execution: Execution,
    error: Option<Error>,
}

impl<P> Evaluator<'_, P>
where
    P: Fn(&[f64]) -> Result<QuantumState> + Sync,
{
    fn shots_so_far(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_shots)
    }

    fn push(&mut self, x: &[f64], outcome: Result<(f64, f64)>) -> f64 {
        match outcome {
            Ok((estimate, exact)) => {
                let record = VqeRecord {
                    iteration: self.iteration,
                    evaluation: self.records.len(),
                    params: x.to_vec(),
                    energy_estimate: estimate,
                    exact_energy: exact,
                    cumulative_shots: self.shots_so_far() + self.cost,
                    wall_time: self.start.elapsed().as_secs_f64(),
                };
                self.records.push(record);
                estimate
            }
            Err(e) => {
                log::debug!("evaluation failed: {e}");
                self.error.get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn next_seeds(&mut self, n: usize) -> Vec<u64> {
        let base = self.records.len() as u64;
        (0..n as u64)
            .map(|k| {
                if self.crn {
                    derive_seed(self.seed, base + k)
                } else {
                    self.stream.random()
                }
            })
            .collect()
    }
}

impl<P> Objective for Evaluator<'_, P>
where
    P: Fn(&[f64]) -> Result<QuantumState> + Sync,
{
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        let seed = self.next_seeds(1)[0];
        let outcome = (self.prepare)(x).and_then(|psi| self.estimator.energy(self.h, &psi, seed));
        self.push(x, outcome)
    }

    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        let seeds = self.next_seeds(xs.len());
        let (h, estimator, prepare) = (self.h, self.estimator, &self.prepare);
        let outcomes = map_indexed_with(self.execution, xs.len(), |k| {
            prepare(&xs[k]).and_then(|psi| estimator.energy(h, &psi, seeds[k]))
        });
        xs.iter().zip(outcomes).map(|(x, o)| self.push(x, o)).collect()
    }
}

struct Session<'a> {
    h: &'a PauliHamiltonian,
    cfg: &'a VqeConfig,
    estimator: Estimator,
    records: Vec<VqeRecord>,
    start: Instant,
    stream: ChaCha8Rng,
}

impl<'a> Session<'a> {
    fn new(h: &'a PauliHamiltonian, cfg: &'a VqeConfig, estimator: Estimator) -> Self {
        Session {
            h,
            cfg,
            estimator,
            records: Vec::new(),
            start: Instant::now(),
            stream: ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX)),
        }
    }

    fn cost(&self) -> usize {
        self.estimator.cost(self.h)
    }

    fn shots(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_shots)
    }

    /// Evaluations affordable within the shot budget, at most `cap`.
    fn affordable(&self, cap: usize) -> usize {
        match self.cost() {
            0 => cap,
            c => cap.min(self.cfg.shot_budget_total.saturating_sub(self.shots()) / c),
        }
    }

    /// Runs one optimizer pass; returns the best parameters seen in it.
    fn pass<P>(
        &mut self,
        kind: OptimizerKind,
        prepare: P,
        x0: &[f64],
        bounds: &Bounds,
        max_evals: usize,
        iteration: usize,
    ) -> Result<Option<(Vec<f64>, f64)>>
    where
        P: Fn(&[f64]) -> Result<QuantumState> + Sync,
    {
        if max_evals == 0 {
            return Ok(None);
        }
        let settings = self
            .cfg
            .optimizer_settings(max_evals, derive_seed(self.cfg.seed ^ 0x5eed, iteration as u64));
        let mut eval = Evaluator {
            h: self.h,
            prepare,
            estimator: &self.estimator,
            cost: self.estimator.cost(self.h),
            seed: self.cfg.seed,
            crn: self.cfg.common_random_numbers,
            stream: self.stream.clone(),
            iteration,
            records: &mut self.records,
            start: self.start,
            execution: self.cfg.execution,
            error: None,
        };
        let result = minimize(kind, &mut eval, x0, bounds, &settings);
        self.stream = eval.stream.clone();
        let first_error = eval.error.take();
        match result {
            Ok(r) => Ok(Some((r.best_params, r.best_value))),
            Err(e) => Err(first_error.unwrap_or(e)),
        }
    }

    fn finish(self, stop: StopReason, final_pulse: Option<PulseParams>) -> VqeTrace {
        VqeTrace::from_records(self.records, stop, final_pulse)
    }
}

fn check_qubits(h: &PauliHamiltonian, r: &Register) -> Result<()> {
    if h.n_qubits() != r.len() {
        return Err(Error::QubitMismatch {
            left: h.n_qubits(),
            right: r.len(),
        });
    }
    Ok(())
}

/// Records a single evaluation of a fixed state (used when the Hamiltonian
/// is constant and nothing needs optimizing).
fn constant_trace(h: &PauliHamiltonian, params: Vec<f64>) -> VqeTrace {
    let e = h.identity_coefficient();
    VqeTrace::from_records(
        vec![VqeRecord {
            iteration: 0,
            evaluation: 0,
            params,
            energy_estimate: e,
            exact_energy: e,
            cumulative_shots: 0,
            wall_time: 0.0,
        }],
        StopReason::Converged,
        None,
    )
}

/// Optimizes `(delta0, delta1, t)` of the UCC-XY state on a two-atom XY
/// register.
pub fn run_ucc_xy(h_eff: &PauliHamiltonian, r: &Register, cfg: &VqeConfig) -> Result<VqeTrace> {
    cfg.validate()?;
    if h_eff.n_qubits() != 2 {
        return Err(Error::QubitMismatch {
            left: h_eff.n_qubits(),
            right: 2,
        });
    }
    check_qubits(h_eff, r)?;
    if !matches!(r.model(), InteractionModel::Xy { .. }) {
        return Err(Error::Invalid("UCC-XY needs an XY register".into()));
    }
    if h_eff.observables().next().is_none() {
        return Ok(constant_trace(h_eff, vec![0.0; 3]));
    }
    let b = &cfg.bounds;
    let bounds = Bounds::new(
        vec![b.delta.0, b.delta.0, b.ucc_time.0],
        vec![b.delta.1, b.delta.1, b.ucc_time.1],
    )?;
    let prepare = |x: &[f64]| ucc_xy_state(x[0], x[1], x[2], r);
    let mut s = Session::new(h_eff, cfg, Estimator::derandomized(h_eff, cfg)?);
    let x0 = bounds.clamp(&[0.0, 0.0, 0.0]).0;
    let n = s.affordable(cfg.max_evals);
    if n == 0 {
        return Err(Error::Budget("shot budget does not cover a single evaluation".into()));
    }
    let best = s.pass(cfg.optimizer, prepare, &x0, &bounds, n, 0)?;
    if cfg.exact_mode && cfg.polish {
        if let Some((x, _)) = best {
            let mut eval_settings = cfg.optimizer_settings(cfg.max_evals, cfg.seed);
            eval_settings.simplex_scale = 0.01;
            let mut sub = Session::new(h_eff, cfg, Estimator::Exact);
            sub.records = std::mem::take(&mut s.records);
            sub.start = s.start;
            let mut eval = Evaluator {
                h: h_eff,
                prepare,
                estimator: &sub.estimator,
                cost: 0,
                seed: cfg.seed,
                crn: true,
                stream: sub.stream.clone(),
                iteration: 1,
                records: &mut sub.records,
                start: sub.start,
                execution: cfg.execution,
                error: None,
            };
            nelder_mead(&mut eval, &x, &bounds, &eval_settings)?;
            return Ok(sub.finish(StopReason::Budget, None));
        }
    }
    Ok(s.finish(StopReason::Budget, None))
}

fn initial_state(h: &PauliHamiltonian, cfg: &VqeConfig) -> Result<QuantumState> {
    match &cfg.init_state {
        Some(bits) => {
            let psi = prepare_product_state_within(bits, &cfg.limits)?;
            if psi.n_qubits() != h.n_qubits() {
                return Err(Error::QubitMismatch {
                    left: h.n_qubits(),
                    right: psi.n_qubits(),
                });
            }
            Ok(psi)
        }
        None => QuantumState::zero(h.n_qubits()),
    }
}

/// Pulse for the alternating ansatz. Parameters are `[t_a^0, t_b^0, t_a^1,
/// ...]`; layer 0 acts first and `H_b` acts before `H_a` within a layer.
pub fn alternating_pulse(params: &[f64], omega: f64, delta: f64, min_segment: f64) -> PulseSequence {
    let mut segments = Vec::with_capacity(params.len());
    for layer in params.chunks(2) {
        segments.push(DriveSegment::global(layer[1], omega, 0.0).with_convention(ZConvention::HalfZ));
        segments.push(DriveSegment::global(layer[0], omega, delta).with_convention(ZConvention::HalfZ));
    }
    PulseSequence {
        segments,
        global_only: true,
        min_segment,
    }
}

/// Pulse for the phase ansatz. Parameters are `[t^0, phi^0, t^1, phi^1, ...]`.
pub fn phase_pulse(params: &[f64], omega: f64, min_segment: f64) -> PulseSequence {
    PulseSequence {
        segments: params
            .chunks(2)
            .map(|p| DriveSegment::global(p[0], omega, 0.0).with_phase(p[1]))
            .collect(),
        global_only: true,
        min_segment,
    }
}

fn run_baseline<F>(
    h_t: &PauliHamiltonian,
    r: &Register,
    cfg: &VqeConfig,
    layers: usize,
    second: (f64, f64),
    pulse: F,
) -> Result<VqeTrace>
where
    F: Fn(&[f64]) -> PulseSequence + Sync,
{
    cfg.validate()?;
    check_qubits(h_t, r)?;
    if layers == 0 {
        return Err(Error::Invalid("at least one layer is required".into()));
    }
    let psi0 = initial_state(h_t, cfg)?;
    let d = cfg.bounds.duration;
    let lower_t = d.0.max(cfg.min_segment);
    if lower_t > d.1 {
        return Err(Error::Invalid("duration bounds lie below the minimum segment".into()));
    }
    let bounds = Bounds::new(
        (0..layers).flat_map(|_| [lower_t, second.0]).collect(),
        (0..layers).flat_map(|_| [d.1, second.1]).collect(),
    )?;
    let prepare = |x: &[f64]| evolve_within(&psi0, r, &pulse(x), &cfg.limits);
    let mut s = Session::new(h_t, cfg, Estimator::per_term(h_t, cfg));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0xa17));
    let x0 = bounds.sample(&mut rng);
    let n = s.affordable(cfg.max_evals);
    if n == 0 {
        return Err(Error::Budget("shot budget does not cover a single evaluation".into()));
    }
    s.pass(cfg.optimizer, prepare, &x0, &bounds, n, 0)?;
    Ok(s.finish(StopReason::Budget, None))
}

/// Alternating constant pulses `prod_l U_a(t_a^l) U_b(t_b^l)` with
/// `H_a = sum (Omega X - delta Z)/2 + H_int` and `H_b = sum Omega X / 2 + H_int`,
/// optimizing the `2L` durations. Each term is measured separately.
pub fn run_alternating(
    h_t: &PauliHamiltonian,
    r: &Register,
    layers: usize,
    cfg: &VqeConfig,
) -> Result<VqeTrace> {
    let (omega, delta, min_seg) = (cfg.drive_omega, cfg.drive_delta, cfg.min_segment);
    let d = cfg.bounds.duration;
    run_baseline(h_t, r, cfg, layers, (d.0.max(min_seg), d.1), move |x| {
        alternating_pulse(x, omega, delta, min_seg)
    })
}

/// Phase-segment ansatz: `L` segments at fixed Rabi frequency, optimizing
/// each segment's duration and phase. Each term is measured separately.
pub fn run_phase_ansatz(
    h_t: &PauliHamiltonian,
    r: &Register,
    segments: usize,
    cfg: &VqeConfig,
) -> Result<VqeTrace> {
    let (omega, min_seg) = (cfg.drive_omega, cfg.min_segment);
    run_baseline(h_t, r, cfg, segments, cfg.bounds.phase, move |x| {
        phase_pulse(x, omega, min_seg)
    })
}

/// Piecewise-constant global drive on `0 < t_1 < ... < t_K = t_tot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseParams {
    pub time_labels: Vec<f64>,
    pub omegas: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl PulseParams {
    /// `k` equal intervals over `t_tot`.
    pub fn uniform(t_tot: f64, omegas: Vec<f64>, deltas: Vec<f64>) -> Result<Self> {
        let k = omegas.len();
        let labels = (1..=k).map(|i| t_tot * i as f64 / k as f64).collect();
        let p = PulseParams {
            time_labels: labels,
            omegas,
            deltas,
        };
        p.check_shape()?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.time_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_labels.is_empty()
    }

    pub fn t_tot(&self) -> f64 {
        self.time_labels.last().copied().unwrap_or(0.0)
    }

    fn check_shape(&self) -> Result<()> {
        let k = self.time_labels.len();
        if k == 0 || self.omegas.len() != k || self.deltas.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: self.omegas.len().min(self.deltas.len()),
            });
        }
        Ok(())
    }

    pub fn validate(&self, bounds: &ParamBounds, min_segment: f64) -> Result<()> {
        self.check_shape()?;
        let mut prev = 0.0;
        for &t in &self.time_labels {
            if !(t - prev >= min_segment - 1e-12) {
                return Err(Error::Invalid(format!(
                    "time labels must increase by at least {min_segment} us"
                )));
            }
            prev = t;
        }
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        if !self.omegas.iter().all(|&w| inside(w, bounds.omega))
            || !self.deltas.iter().all(|&d| inside(d, bounds.delta))
        {
            return Err(Error::Invalid("pulse amplitudes outside their bounds".into()));
        }
        Ok(())
    }

    pub fn durations(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.time_labels
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }

    pub fn to_pulse(&self, min_segment: f64) -> PulseSequence {
        PulseSequence {
            segments: self
                .durations()
                .into_iter()
                .zip(self.omegas.iter().zip(&self.deltas))
                .map(|(d, (&w, &delta))| DriveSegment::global(d, w, delta))
                .collect(),
            global_only: true,
            min_segment,
        }
    }

    /// `[omega_1..omega_K, delta_1..delta_K]`.
    pub fn flat(&self) -> Vec<f64> {
        self.omegas.iter().chain(&self.deltas).copied().collect()
    }

    pub fn with_flat(&self, x: &[f64]) -> PulseParams {
        let k = self.len();
        PulseParams {
            time_labels: self.time_labels.clone(),
            omegas: x[..k].to_vec(),
            deltas: x[k..2 * k].to_vec(),
        }
    }

    fn flat_bounds(&self, b: &ParamBounds) -> Result<Bounds> {
        let k = self.len();
        Bounds::new(
            [vec![b.omega.0; k], vec![b.delta.0; k]].concat(),
            [vec![b.omega.1; k], vec![b.delta.1; k]].concat(),
        )
    }

    /// Two intervals split at `t_tot / 2`, amplitudes drawn uniformly.
    pub fn random_initial<R: Rng>(t_tot: f64, bounds: &ParamBounds, rng: &mut R) -> Self {
        let mut draw = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();
        let omegas = vec![draw(bounds.omega), draw(bounds.omega)];
        let deltas = vec![draw(bounds.delta), draw(bounds.delta)];
        PulseParams {
            time_labels: vec![t_tot / 2.0, t_tot],
            omegas,
            deltas,
        }
    }
}

/// True if `t` can become a new label: both children keep at least
/// `min_segment`.
fn feasible_label(p: &PulseParams, t: f64, min_segment: f64) -> bool {
    let mut prev = 0.0;
    for &label in &p.time_labels {
        if t > prev && t < label {
            return t - prev >= min_segment && label - t >= min_segment;
        }
        if t == label {
            return false;
        }
        prev = label;
    }
    false
}

/// Inserts the label `t`; both children inherit the parent's amplitudes.
pub fn split_time_label_at(p: &PulseParams, t: f64, min_segment: f64) -> Result<PulseParams> {
    if !feasible_label(p, t, min_segment) {
        return Err(Error::Invalid(format!("cannot insert a time label at {t} us")));
    }
    let k = p.time_labels.partition_point(|&label| label < t);
    let mut q = p.clone();
    q.time_labels.insert(k, t);
    q.omegas.insert(k, p.omegas[k]);
    q.deltas.insert(k, p.deltas[k]);
    Ok(q)
}

/// Draws `t` uniformly on `(0, t_tot)`, rejecting draws that would leave a
/// child shorter than `min_segment`, and splits the interval containing it.
pub fn split_time_label(p: &PulseParams, seed: u64, min_segment: f64) -> Result<PulseParams> {
    p.check_shape()?;
    let durations = p.durations();
    if !durations.iter().any(|&d| d > 2.0 * min_segment) {
        return Err(Error::SplitSaturated);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_tot = p.t_tot();
    loop {
        let t = t_tot * rng.random::<f64>();
        if feasible_label(p, t, min_segment) {
            return split_time_label_at(p, t, min_segment);
        }
    }
}

/// Optional starting point for iterative splitting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WarmStart {
    pub params: Option<PulseParams>,
}

/// Iterative pulse splitting starting from two intervals: optimize all
/// amplitudes for `evals_per_iteration` evaluations, split a random time
/// label, and repeat until the shot budget (or, in exact mode,
/// `max_iterations`) is spent or splitting saturates.
pub fn run_iterative_pulse(
    h_t: &PauliHamiltonian,
    r: &Register,
    cfg: &VqeConfig,
    init_state: &str,
) -> Result<VqeTrace> {
    run_iterative_pulse_from(h_t, r, cfg, init_state, &WarmStart::default())
}

pub fn run_iterative_pulse_from(
    h_t: &PauliHamiltonian,
    r: &Register,
    cfg: &VqeConfig,
    init_state: &str,
    warm: &WarmStart,
) -> Result<VqeTrace> {
    cfg.validate()?;
    check_qubits(h_t, r)?;
    let psi0 = prepare_product_state_within(init_state, &cfg.limits)?;
    if psi0.n_qubits() != h_t.n_qubits() {
        return Err(Error::QubitMismatch {
            left: h_t.n_qubits(),
            right: psi0.n_qubits(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x1417));
    let mut params = match &warm.params {
        Some(p) => {
            p.validate(&cfg.bounds, cfg.min_segment)?;
            p.clone()
        }
        None => PulseParams::random_initial(cfg.t_tot, &cfg.bounds, &mut rng),
    };
    let mut s = Session::new(h_t, cfg, Estimator::derandomized(h_t, cfg)?);
    let max_passes = if s.cost() == 0 { cfg.max_iterations.max(1) } else { usize::MAX };
    let mut stop = StopReason::MaxIterations;
    for iteration in 0..max_passes {
        let n = s.affordable(cfg.evals_per_iteration);
        if n == 0 {
            stop = StopReason::Budget;
            break;
        }
        let bounds = params.flat_bounds(&cfg.bounds)?;
        let current = params.clone();
        let prepare =
            |x: &[f64]| evolve_within(&psi0, r, &current.with_flat(x).to_pulse(cfg.min_segment), &cfg.limits);
        if let Some((x, _)) = s.pass(cfg.optimizer, prepare, &params.flat(), &bounds, n, iteration)? {
            params = params.with_flat(&x);
        }
        match split_time_label(&params, derive_seed(cfg.seed, 0x5917 + iteration as u64), cfg.min_segment) {
            Ok(p) => params = p,
            Err(Error::SplitSaturated) => {
                stop = StopReason::SplitSaturated;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(s.finish(stop, Some(params)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    /// Ket-order bitstring of the initial product state.
    pub bits: String,
    /// Relative error after the first optimization pass, averaged over repeats.
    pub error: f64,
    /// Best energy of the first pass, averaged over repeats.
    pub energy: f64,
    /// Pulse parameters behind the best energy of the first repeat.
    pub params: Option<PulseParams>,
}

/// Runs the first pass of iterative splitting from every computational
/// basis state and ranks them by relative error (ties by index). With
/// `evals_per_iteration == 0` the product state itself is scored.
pub fn scan_product_states(
    h_t: &PauliHamiltonian,
    r: &Register,
    cfg: &VqeConfig,
) -> Result<Vec<ScanEntry>> {
    cfg.validate()?;
    check_qubits(h_t, r)?;
    let n = h_t.n_qubits();
    if n > cfg.limits.scan_qubits {
        return Err(Error::CapExceeded {
            what: "product-state scan",
            size: n,
            cap: cfg.limits.scan_qubits,
        });
    }
    let e_exact = h_t.ground_energy_exact_within(&cfg.limits)?;
    let repeats = cfg.n_repeats.max(1);
    // Parallel over states, sequential inside each pass.
    let inner = VqeConfig {
        execution: Execution::Sequential,
        max_iterations: 1,
        shot_budget_total: if cfg.exact_mode {
            usize::MAX
        } else {
            cfg.shots_per_energy.saturating_mul(cfg.evals_per_iteration.max(1))
        },
        ..cfg.clone()
    };
    let entries = map_indexed_with(cfg.execution, 1usize << n, |index| -> Result<ScanEntry> {
        let bits = format_bitstring(index, n);
        let mut energy_sum = 0.0;
        let mut error_sum = 0.0;
        let mut params = None;
        for rep in 0..repeats {
            let (e, p) = if cfg.evals_per_iteration == 0 {
                (h_t.expectation(&prepare_product_state_within(&bits, &cfg.limits)?)?, None)
            } else {
                let run_cfg = VqeConfig {
                    seed: derive_seed(cfg.seed, rep as u64),
                    ..inner.clone()
                };
                let trace = first_pass(h_t, r, &run_cfg, &bits)?;
                let p = trace.final_pulse.clone();
                (trace.best_energy, p)
            };
            energy_sum += e;
            error_sum += if e_exact == 0.0 {
                (e - e_exact).abs()
            } else {
                relative_error(e_exact, e)?
            };
            if rep == 0 {
                params = p;
            }
        }
        Ok(ScanEntry {
            bits,
            error: error_sum / repeats as f64,
            energy: energy_sum / repeats as f64,
            params,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut ranked: Vec<(usize, ScanEntry)> = entries.into_iter().enumerate().collect();
    ranked.sort_by(|a, b| a.1.error.total_cmp(&b.1.error).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().map(|(_, e)| e).collect())
}

/// One optimizer pass on two intervals; `final_pulse` holds the best
/// parameters of the pass (before any split).
fn first_pass(h_t: &PauliHamiltonian, r: &Register, cfg: &VqeConfig, bits: &str) -> Result<VqeTrace> {
    let psi0 = prepare_product_state_within(bits, &cfg.limits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x1417));
    let params = PulseParams::random_initial(cfg.t_tot, &cfg.bounds, &mut rng);
    let bounds = params.flat_bounds(&cfg.bounds)?;
    let mut s = Session::new(h_t, cfg, Estimator::derandomized(h_t, cfg)?);
    let n = s.affordable(cfg.evals_per_iteration);
    let prepare =
        |x: &[f64]| evolve_within(&psi0, r, &params.with_flat(x).to_pulse(cfg.min_segment), &cfg.limits);
    let best = s.pass(cfg.optimizer, prepare, &params.flat(), &bounds, n, 0)?;
    let pulse = best.map(|(x, _)| params.with_flat(&x));
    Ok(s.finish(StopReason::MaxIterations, pulse))
}
