use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use rydberg_vqe::dynamics::{evolve_within, format_bitstring, prepare_product_state_within, PulseSequence, QuantumState};
use rydberg_vqe::exec::Execution;
use rydberg_vqe::measurement::{
    allocate_shots, derandomize, estimate_energy, measure_plan, observables_of, DerandomizedPlan,
};
use rydberg_vqe::pauli::PauliHamiltonian;
use rydberg_vqe::register::{optimize_register, target_matrix, Register};
use rydberg_vqe::vqe::{
    relative_error, run_alternating, run_iterative_pulse_from, run_phase_ansatz, run_ucc_xy,
    scan_product_states, Ansatz, VqeConfig, VqeTrace, WarmStart,
};

use crate::config::RunConfig;
use crate::output::{Header, Input, OutDir};

/// Shared state of one invocation.
pub struct Ctx {
    pub cfg: RunConfig,
    pub jobs: usize,
    pub out: OutDir,
}

impl Ctx {
    fn execution(&self) -> Execution {
        if self.jobs > 1 {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    fn vqe_config(&self) -> VqeConfig {
        VqeConfig {
            execution: self.execution(),
            ..self.cfg.vqe.clone()
        }
    }

    fn header(&self, command: &str, inputs: &[&Input]) -> Result<()> {
        Header::new(command, &self.cfg, self.jobs, inputs).write(&self.out)?;
        Ok(())
    }
}

fn ring(n: usize, cfg: &RunConfig) -> Result<Register> {
    let radius = cfg.physics.init_radius;
    let positions = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect();
    Ok(Register::with_min_spacing(positions, cfg.physics.interaction(), 0.0)?)
}

fn load_register(input: &Input, cfg: &RunConfig) -> Result<Register> {
    let r: Register = input.json()?;
    r.validate(cfg.physics.min_spacing)?;
    Ok(r)
}

#[derive(Serialize)]
struct ScoreRow {
    evaluation: usize,
    objective: f64,
}

fn embed_register(
    ctx: &Ctx,
    h: &PauliHamiltonian,
    init: Option<&Input>,
) -> Result<(Register, f64)> {
    let n = h.n_qubits();
    let vt = target_matrix(h, n)?;
    if vt.is_zero() {
        warn!("no positive two-qubit Z couplings; the embedding only spreads atoms apart");
    }
    let init = match init {
        Some(i) => load_register(i, &ctx.cfg)?,
        None => ring(n, &ctx.cfg)?,
    };
    let opts = rydberg_vqe::register::EmbeddingOptions {
        execution: ctx.execution(),
        ..ctx.cfg.embedding.clone()
    };
    let res = optimize_register(&vt, &init, &opts)?;
    if !res.feasible {
        bail!(rydberg_vqe::Error::Invalid(
            "no candidate register satisfies the minimum spacing".into()
        ));
    }
    let rows: Vec<ScoreRow> = res
        .trace
        .iter()
        .enumerate()
        .map(|(evaluation, &objective)| ScoreRow { evaluation, objective })
        .collect();
    ctx.out.write_csv("embed_trace.csv", &rows)?;
    ctx.out.write_json("register.json", &res.register)?;
    info!("embedding score {:.6e} (start {})", res.score, res.best_start);
    Ok((res.register, res.score))
}

pub fn embed(ctx: &Ctx, hamiltonian: &str, init: Option<&str>) -> Result<()> {
    let h_in = Input::read(hamiltonian)?;
    let init_in = init.map(Input::read).transpose()?;
    let inputs: Vec<&Input> = std::iter::once(&h_in).chain(init_in.as_ref()).collect();
    ctx.header("embed", &inputs)?;
    let h = h_in.hamiltonian()?;
    let (r, score) = embed_register(ctx, &h, init_in.as_ref())?;
    println!("embedded {} atoms, score {score:.6e}, minimum distance {:.3} um", r.len(), r.min_distance());
    Ok(())
}

#[derive(Serialize)]
struct StateFile {
    n_qubits: usize,
    /// `[re, im]` per basis index, qubit 0 least significant.
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ProbabilityRow {
    bits: String,
    probability: f64,
}

fn prepared_state(ctx: &Ctx, r: &Register, pulse: Option<&PulseSequence>, init: &str) -> Result<QuantumState> {
    let limits = &ctx.cfg.vqe.limits;
    let psi0 = prepare_product_state_within(init, limits)?;
    if psi0.n_qubits() != r.len() {
        bail!(rydberg_vqe::Error::QubitMismatch {
            left: r.len(),
            right: psi0.n_qubits()
        });
    }
    match pulse {
        Some(p) => Ok(evolve_within(&psi0, r, p, limits)?),
        None => Ok(psi0),
    }
}

fn zeros(n: usize) -> String {
    "0".repeat(n)
}

pub fn evolve(ctx: &Ctx, register: &str, pulse: &str, init: Option<&str>) -> Result<()> {
    let (r_in, p_in) = (Input::read(register)?, Input::read(pulse)?);
    ctx.header("evolve", &[&r_in, &p_in])?;
    let r = load_register(&r_in, &ctx.cfg)?;
    let p: PulseSequence = p_in.json()?;
    let init = init.map(str::to_string).unwrap_or_else(|| zeros(r.len()));
    let psi = prepared_state(ctx, &r, Some(&p), &init)?;
    let n = psi.n_qubits();
    ctx.out.write_json(
        "state.json",
        &StateFile {
            n_qubits: n,
            amplitudes: psi.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        },
    )?;
    let rows: Vec<ProbabilityRow> = psi
        .probabilities()
        .into_iter()
        .enumerate()
        .map(|(k, probability)| ProbabilityRow {
            bits: format_bitstring(k, n),
            probability,
        })
        .collect();
    ctx.out.write_csv("probabilities.csv", &rows)?;
    println!("evolved {n} qubits for {:.4} us", p.total_duration());
    Ok(())
}

pub fn derandomize_cmd(
    ctx: &Ctx,
    hamiltonian: &str,
    settings: Option<usize>,
    epsilon: Option<f64>,
    shots: Option<usize>,
) -> Result<()> {
    let h_in = Input::read(hamiltonian)?;
    ctx.header("derandomize", &[&h_in])?;
    let h = h_in.hamiltonian()?;
    let obs = observables_of(&h);
    let m = settings.unwrap_or(ctx.cfg.vqe.plan_settings);
    let eps = epsilon.unwrap_or(ctx.cfg.vqe.epsilon);
    let mut plan = derandomize(&obs, h.n_qubits(), m, eps)?;
    if let Some(budget) = shots {
        plan = allocate_shots(&plan, budget, &obs)?;
    }
    let uncovered = obs.iter().filter(|(s, _)| !plan.covers([s])).count();
    ctx.out.write_json("plan.json", &plan)?;
    println!(
        "{} distinct bases from {m} settings, {} shots, {uncovered} of {} terms uncovered",
        plan.n_distinct(),
        plan.total_shots(),
        obs.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct TermRow {
    label: String,
    coefficient: f64,
    omega: f64,
    hits: usize,
}

#[derive(Serialize)]
struct EstimateFile {
    energy: f64,
    exact_mode: bool,
    shots: usize,
    per_term: Vec<TermRow>,
    uncovered: Vec<String>,
}

pub struct EstimateArgs<'a> {
    pub hamiltonian: &'a str,
    pub plan: Option<&'a str>,
    pub register: &'a str,
    pub pulse: Option<&'a str>,
    pub init: Option<&'a str>,
    pub exact: bool,
}

pub fn estimate(ctx: &Ctx, a: &EstimateArgs) -> Result<()> {
    let h_in = Input::read(a.hamiltonian)?;
    let r_in = Input::read(a.register)?;
    let p_in = a.pulse.map(Input::read).transpose()?;
    let plan_in = a.plan.map(Input::read).transpose()?;
    let inputs: Vec<&Input> = [Some(&h_in), Some(&r_in), p_in.as_ref(), plan_in.as_ref()]
        .into_iter()
        .flatten()
        .collect();
    ctx.header("estimate", &inputs)?;
    let h = h_in.hamiltonian()?;
    let r = load_register(&r_in, &ctx.cfg)?;
    let pulse: Option<PulseSequence> = p_in.as_ref().map(Input::json).transpose()?;
    let init = a.init.map(str::to_string).unwrap_or_else(|| zeros(r.len()));
    let psi = prepared_state(ctx, &r, pulse.as_ref(), &init)?;
    let file = if a.exact {
        let values = h.term_expectations(&psi)?;
        EstimateFile {
            energy: h.expectation(&psi)?,
            exact_mode: true,
            shots: 0,
            per_term: h
                .terms()
                .iter()
                .zip(values)
                .filter(|(t, _)| !t.string.is_identity())
                .map(|(t, omega)| TermRow {
                    label: t.string.label(),
                    coefficient: t.coefficient,
                    omega,
                    hits: 0,
                })
                .collect(),
            uncovered: Vec::new(),
        }
    } else {
        let Some(plan_in) = &plan_in else {
            bail!(rydberg_vqe::Error::Invalid("sampled estimation needs --plan (or use --exact)".into()));
        };
        let plan: DerandomizedPlan = plan_in.json()?;
        let batches = measure_plan(&psi, &plan, ctx.cfg.seed, ctx.execution())?;
        let est = estimate_energy(&h, &batches)?;
        EstimateFile {
            energy: est.energy,
            exact_mode: false,
            shots: est.shots,
            per_term: est
                .term_indices
                .iter()
                .zip(&est.per_term)
                .zip(&est.hits)
                .map(|((&i, &omega), &hits)| TermRow {
                    label: h.terms()[i].string.label(),
                    coefficient: h.terms()[i].coefficient,
                    omega,
                    hits,
                })
                .collect(),
            uncovered: est.uncovered.iter().map(|&i| h.terms()[i].string.label()).collect(),
        }
    };
    ctx.out.write_json("estimate.json", &file)?;
    println!(
        "energy {:.10} ({}), {} uncovered terms",
        file.energy,
        if a.exact { "exact" } else { "sampled" },
        file.uncovered.len()
    );
    Ok(())
}

/// Register from `--register`, or from embedding when `--embed` is set.
fn vqe_register(ctx: &Ctx, h: &PauliHamiltonian, register: Option<&Input>, embed: bool) -> Result<Register> {
    match (register, embed) {
        (Some(r), false) => load_register(r, &ctx.cfg),
        (r, true) => Ok(embed_register(ctx, h, r)?.0),
        (None, false) => bail!(rydberg_vqe::Error::Invalid("give --register or --embed".into())),
    }
}

#[derive(Serialize)]
struct TraceRow<'a> {
    seed: u64,
    iteration: usize,
    evaluation: usize,
    params: &'a [f64],
    energy_est: f64,
    exact_energy: f64,
    cumulative_shots: usize,
    wall_time: f64,
}

#[derive(Serialize)]
struct SummaryRow {
    seed: u64,
    ansatz: String,
    init_state: String,
    best_energy: f64,
    ground_energy: Option<f64>,
    relative_error: Option<f64>,
    total_shots: usize,
    evaluations: usize,
    stop: String,
}

#[derive(Serialize)]
struct PlotRow {
    seed: u64,
    cumulative_shots: usize,
    running_best: f64,
    relative_error: Option<f64>,
}

fn snake(v: impl Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub struct VqeArgs<'a> {
    pub hamiltonian: &'a str,
    pub register: Option<&'a str>,
    pub embed: bool,
    pub init: Option<&'a str>,
}

pub fn vqe(ctx: &Ctx, a: &VqeArgs) -> Result<()> {
    let h_in = Input::read(a.hamiltonian)?;
    let r_in = a.register.map(Input::read).transpose()?;
    let inputs: Vec<&Input> = std::iter::once(&h_in).chain(r_in.as_ref()).collect();
    ctx.header("vqe", &inputs)?;
    let h = h_in.hamiltonian()?;
    let r = vqe_register(ctx, &h, r_in.as_ref(), a.embed)?;
    let base = ctx.vqe_config();
    let ground = match h.ground_energy_exact_within(&base.limits) {
        Ok(e) => Some(e),
        Err(e) => {
            warn!("no exact reference energy: {e}");
            None
        }
    };

    let n = h.n_qubits();
    let mut init = a
        .init
        .map(str::to_string)
        .or_else(|| base.init_state.clone())
        .unwrap_or_else(|| zeros(n));
    let mut warm = WarmStart::default();
    if ctx.cfg.run.warm_start && base.ansatz == Ansatz::IterativeSplit {
        let scan_cfg = VqeConfig { exact_mode: true, ..base.clone() };
        let best = scan_product_states(&h, &r, &scan_cfg)?.into_iter().next().context("empty scan")?;
        info!("warm start from {} (first-pass error {:.4})", best.bits, best.error);
        init = best.bits;
        warm.params = best.params;
    }

    let seeds: Vec<u64> = (0..ctx.cfg.run.repeats as u64).map(|k| ctx.cfg.seed + k).collect();
    let run_one = |seed: u64| -> Result<VqeTrace> {
        let cfg = VqeConfig {
            seed,
            init_state: Some(init.clone()),
            ..base.clone()
        };
        Ok(match cfg.ansatz {
            Ansatz::UccXy => run_ucc_xy(&h, &r, &cfg)?,
            Ansatz::AlternatingAb => run_alternating(&h, &r, cfg.layers, &cfg)?,
            Ansatz::PhaseSegments => run_phase_ansatz(&h, &r, cfg.layers, &cfg)?,
            Ansatz::IterativeSplit => run_iterative_pulse_from(&h, &r, &cfg, &init, &warm)?,
        })
    };
    // Independent seeds run side by side; results keep seed order.
    let traces: Vec<VqeTrace> = if ctx.jobs > 1 {
        seeds.par_iter().map(|&s| run_one(s)).collect::<Result<_>>()?
    } else {
        seeds.iter().map(|&s| run_one(s)).collect::<Result<_>>()?
    };

    let err = |e: f64| ground.and_then(|g| relative_error(g, e).ok());
    let mut trace_rows = Vec::new();
    let mut plot_rows = Vec::new();
    let mut summary = Vec::new();
    for (&seed, t) in seeds.iter().zip(&traces) {
        for (rec, best) in t.records.iter().zip(t.running_best()) {
            trace_rows.push(TraceRow {
                seed,
                iteration: rec.iteration,
                evaluation: rec.evaluation,
                params: &rec.params,
                energy_est: rec.energy_estimate,
                exact_energy: rec.exact_energy,
                cumulative_shots: rec.cumulative_shots,
                wall_time: rec.wall_time,
            });
            plot_rows.push(PlotRow {
                seed,
                cumulative_shots: rec.cumulative_shots,
                running_best: best,
                relative_error: err(best),
            });
        }
        summary.push(SummaryRow {
            seed,
            ansatz: snake(base.ansatz),
            init_state: init.clone(),
            best_energy: t.best_energy,
            ground_energy: ground,
            relative_error: err(t.best_energy),
            total_shots: t.total_shots(),
            evaluations: t.records.len(),
            stop: snake(t.stop),
        });
    }
    ctx.out.write_jsonl("trace.jsonl", &trace_rows)?;
    ctx.out.write_csv("plot.csv", &plot_rows)?;
    ctx.out.write_csv("summary.csv", &summary)?;
    for row in &summary {
        match row.relative_error {
            Some(e) => println!("seed {}: best energy {:.8}, error {:.3}%, {} shots", row.seed, row.best_energy, 100.0 * e, row.total_shots),
            None => println!("seed {}: best energy {:.8}, {} shots", row.seed, row.best_energy, row.total_shots),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanRow {
    rank: usize,
    bits: String,
    relative_error: f64,
    energy: f64,
}

pub fn scan_init(ctx: &Ctx, hamiltonian: &str, register: Option<&str>, embed: bool) -> Result<()> {
    let h_in = Input::read(hamiltonian)?;
    let r_in = register.map(Input::read).transpose()?;
    let inputs: Vec<&Input> = std::iter::once(&h_in).chain(r_in.as_ref()).collect();
    ctx.header("scan-init", &inputs)?;
    let h = h_in.hamiltonian()?;
    let r = vqe_register(ctx, &h, r_in.as_ref(), embed)?;
    let ranked = scan_product_states(&h, &r, &ctx.vqe_config())?;
    let rows: Vec<ScanRow> = ranked
        .iter()
        .enumerate()
        .map(|(rank, e)| ScanRow {
            rank: rank + 1,
            bits: e.bits.clone(),
            relative_error: e.error,
            energy: e.energy,
        })
        .collect();
    ctx.out.write_csv("scan.csv", &rows)?;
    if let Some(best) = rows.first() {
        println!("best initial state {} (error {:.4}%)", best.bits, 100.0 * best.relative_error);
    }
    Ok(())
}
