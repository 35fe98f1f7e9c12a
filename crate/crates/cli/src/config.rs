//! Run configuration read from a TOML file.
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//!
//! [physics]
//! model = "ising"        # or "xy"
//! c6 = 5420503.0         # rad/us um^6
//! c3 = 3700.0            # rad/us um^3
//! min_spacing = 4.0      # um
//! init_radius = 20.0     # um, circle used when no initial register is given
//!
//! [embedding]            # register optimizer
//! max_evals = 3000
//! n_starts = 10
//!
//! [vqe]                  # every field of the library's VQE configuration
//! ansatz = "iterative_split"
//! shot_budget_total = 350000
//!
//! [run]
//! repeats = 5            # independent seeds, run in parallel with --jobs
//! warm_start = true      # exact product-state scan before iterative splitting
//! ```
//!
//! Unknown keys anywhere are rejected.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rydberg_vqe::register::{EmbeddingOptions, InteractionModel, DEFAULT_C3, DEFAULT_C6, DEFAULT_MIN_SPACING};
use rydberg_vqe::vqe::VqeConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ising,
    Xy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub model: ModelKind,
    pub c6: f64,
    pub c3: f64,
    pub min_spacing: f64,
    pub init_radius: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            model: ModelKind::Ising,
            c6: DEFAULT_C6,
            c3: DEFAULT_C3,
            min_spacing: DEFAULT_MIN_SPACING,
            init_radius: 20.0,
        }
    }
}

impl Physics {
    pub fn interaction(&self) -> InteractionModel {
        match self.model {
            ModelKind::Ising => InteractionModel::Ising { c6: self.c6 },
            ModelKind::Xy => InteractionModel::Xy { c3: self.c3 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub repeats: usize,
    pub warm_start: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            repeats: 1,
            warm_start: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub physics: Physics,
    pub embedding: EmbeddingOptions,
    pub vqe: VqeConfig,
    pub run: RunSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            physics: Physics::default(),
            embedding: EmbeddingOptions::default(),
            vqe: VqeConfig::default(),
            run: RunSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid configuration")?;
        Ok(cfg)
    }

    /// Applies the `--seed` override to every seeded component.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.vqe.seed = self.seed;
        self.embedding.seed = self.seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        let p = &self.physics;
        for (name, v) in [
            ("physics.c6", p.c6),
            ("physics.c3", p.c3),
            ("physics.min_spacing", p.min_spacing),
            ("physics.init_radius", p.init_radius),
            ("vqe.min_segment", self.vqe.min_segment),
            ("embedding.min_spacing", self.embedding.min_spacing),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!(rydberg_vqe::Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.run.repeats == 0 {
            bail!(rydberg_vqe::Error::Invalid("run.repeats must be at least 1".into()));
        }
        self.vqe.validate()?;
        Ok(())
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
