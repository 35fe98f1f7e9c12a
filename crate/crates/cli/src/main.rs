//! `rydberg-vqe`: register embedding, pulse evolution, derandomized
//! measurement and VQE runs from the command line.
//!
//! Exit codes: 0 success, 2 unreadable input or configuration, 3 violated
//! constraint, 4 exhausted budget, 5 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{Ctx, EstimateArgs, VqeArgs};
use config::RunConfig;
use output::OutDir;
use rydberg_vqe::ErrorKind;

#[derive(Parser)]
#[command(name = "rydberg-vqe", version, about = "Digital-analog VQE on simulated Rydberg atom arrays")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (1 runs everything sequentially).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place atoms so their interactions mimic the Hamiltonian's ZZ couplings.
    Embed {
        /// Hamiltonian file, or fixture:<name>.
        #[arg(long)]
        hamiltonian: String,
        /// Initial register (JSON); a circle is used otherwise.
        #[arg(long)]
        init: Option<String>,
    },
    /// Evolve a product state under a pulse sequence.
    Evolve {
        #[arg(long)]
        register: String,
        #[arg(long)]
        pulse: String,
        /// Initial bitstring, qubit 0 rightmost; all zeros by default.
        #[arg(long)]
        init: Option<String>,
    },
    /// Build a derandomized measurement plan.
    Derandomize {
        #[arg(long)]
        hamiltonian: String,
        /// Measurement settings before merging duplicates.
        #[arg(long)]
        settings: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Redistribute this many shots over the plan's bases.
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Estimate the energy of a prepared state.
    Estimate {
        #[arg(long)]
        hamiltonian: String,
        #[arg(long)]
        plan: Option<String>,
        #[arg(long)]
        register: String,
        #[arg(long)]
        pulse: Option<String>,
        #[arg(long)]
        init: Option<String>,
        /// Use the exact expectation instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Run the variational loop.
    Vqe {
        #[arg(long)]
        hamiltonian: String,
        #[arg(long)]
        register: Option<String>,
        /// Embed the register first (a given --register becomes the start).
        #[arg(long)]
        embed: bool,
        #[arg(long)]
        init: Option<String>,
    },
    /// Rank computational-basis initial states by first-pass error.
    ScanInit {
        #[arg(long)]
        hamiltonian: String,
        #[arg(long)]
        register: Option<String>,
        #[arg(long)]
        embed: bool,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    }
    .with_seed(cli.seed);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    // Ignored if a pool already exists, which only happens in tests.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    let ctx = Ctx {
        cfg,
        jobs,
        out: OutDir::create(&cli.out)?,
    };
    match &cli.command {
        Command::Embed { hamiltonian, init } => commands::embed(&ctx, hamiltonian, init.as_deref()),
        Command::Evolve { register, pulse, init } => commands::evolve(&ctx, register, pulse, init.as_deref()),
        Command::Derandomize {
            hamiltonian,
            settings,
            epsilon,
            shots,
        } => commands::derandomize_cmd(&ctx, hamiltonian, *settings, *epsilon, *shots),
        Command::Estimate {
            hamiltonian,
            plan,
            register,
            pulse,
            init,
            exact,
        } => commands::estimate(
            &ctx,
            &EstimateArgs {
                hamiltonian,
                plan: plan.as_deref(),
                register,
                pulse: pulse.as_deref(),
                init: init.as_deref(),
                exact: *exact,
            },
        ),
        Command::Vqe {
            hamiltonian,
            register,
            embed,
            init,
        } => commands::vqe(
            &ctx,
            &VqeArgs {
                hamiltonian,
                register: register.as_deref(),
                embed: *embed,
                init: init.as_deref(),
            },
        ),
        Command::ScanInit {
            hamiltonian,
            register,
            embed,
        } => commands::scan_init(&ctx, hamiltonian, register.as_deref(), *embed),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<rydberg_vqe::Error>())
        .map(rydberg_vqe::Error::kind);
    match kind {
        Some(ErrorKind::Constraint) => 3,
        Some(ErrorKind::Budget) => 4,
        Some(ErrorKind::Numeric) => 5,
        Some(ErrorKind::Parse) | None => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
