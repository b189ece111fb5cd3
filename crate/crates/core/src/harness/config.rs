use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::evolve::{AdaptiveParams, BaselineConfig, MutationConfig};
use crate::seeding::{ProviderSettings, DEFAULT_OBJECTIVES};
use crate::sut::WorldConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Provider-seeded start, adaptive operators, differential seeds.
    Full,
    /// As `full`, but the first population is uniform random.
    RandomInit,
    /// As `full`, without differential seeds.
    NoSeeds,
    /// Random start, fixed-threshold uniform operators.
    Baseline,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Full, Variant::RandomInit, Variant::NoSeeds, Variant::Baseline];

    pub fn provider_init(self) -> bool {
        matches!(self, Variant::Full | Variant::NoSeeds)
    }

    pub fn differential_seeds(self) -> bool {
        matches!(self, Variant::Full | Variant::RandomInit)
    }

    pub fn adaptive(self) -> bool {
        self != Variant::Baseline
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::RandomInit => "random_init",
            Variant::NoSeeds => "no_seeds",
            Variant::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_evaluations: usize,
    /// Secondary wall-clock cutoff, checked at generation boundaries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deadline_secs: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_evaluations: 4000,
            deadline_secs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedingConfig {
    /// Consecutive equal top-k generations that count as stagnation.
    pub stagnation_t: usize,
    /// Top-k size; `ceil(N / 4)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stagnation_k: Option<usize>,
    /// Differential distance threshold; median pairwise reference distance
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Threshold used when the reference set has fewer than two members.
    pub fallback_threshold: f64,
    pub max_regeneration_attempts: usize,
    /// Seeds requested per stagnation event; top-k size when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds_per_round: Option<usize>,
    /// Most violating solutions embedded in a feedback prompt.
    pub se_limit: usize,
    /// Most non-violating solutions embedded in a feedback prompt.
    pub sn_limit: usize,
    pub objectives_text: String,
    pub provider: ProviderSettings,
}

impl Default for SeedingConfig {
    fn default() -> Self {
        Self {
            stagnation_t: 3,
            stagnation_k: None,
            threshold: None,
            fallback_threshold: 1.0,
            max_regeneration_attempts: 3,
            seeds_per_round: None,
            se_limit: 8,
            sn_limit: 4,
            objectives_text: DEFAULT_OBJECTIVES.to_string(),
            provider: ProviderSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub variant: Variant,
    pub population_size: usize,
    pub budget: Budget,
    pub master_seed: u64,
    pub world: WorldConfig,
    pub adaptive: AdaptiveParams,
    pub mutation: MutationConfig,
    pub baseline: BaselineConfig,
    pub seeding: SeedingConfig,
    pub archive_capacity: usize,
    /// Evaluation threads; available parallelism when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Stamp events with elapsed milliseconds. Breaks byte-identical logs.
    pub record_wall_clock: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Full,
            population_size: 20,
            budget: Budget::default(),
            master_seed: 0,
            world: WorldConfig::default(),
            adaptive: AdaptiveParams::default(),
            mutation: MutationConfig::default(),
            baseline: BaselineConfig::default(),
            seeding: SeedingConfig::default(),
            archive_capacity: 200,
            workers: None,
            record_wall_clock: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.population_size < 2 {
            return invalid(format!("population_size must be at least 2, got {}", self.population_size));
        }
        if self.budget.max_evaluations < self.population_size {
            return invalid(format!(
                "budget.max_evaluations ({}) must cover the initial population ({})",
                self.budget.max_evaluations, self.population_size
            ));
        }
        if let Some(d) = self.budget.deadline_secs {
            if !(d > 0.0 && d.is_finite()) {
                return invalid(format!("budget.deadline_secs must be positive, got {d}"));
            }
        }
        if self.archive_capacity == 0 {
            return invalid("archive_capacity must be positive".into());
        }
        if self.workers == Some(0) {
            return invalid("workers must be positive".into());
        }
        self.world.validate().map_err(|e| ConfigError::Invalid(format!("world: {e}")))?;
        if self.variant.adaptive() {
            self.adaptive.validate().map_err(ConfigError::Invalid)?;
            self.mutation.validate().map_err(ConfigError::Invalid)?;
        } else {
            self.baseline.validate().map_err(ConfigError::Invalid)?;
        }
        let s = &self.seeding;
        if s.stagnation_t == 0 || s.stagnation_k == Some(0) {
            return invalid("seeding.stagnation_t and stagnation_k must be positive".into());
        }
        if s.max_regeneration_attempts == 0 {
            return invalid("seeding.max_regeneration_attempts must be positive".into());
        }
        if s.se_limit == 0 {
            return invalid("seeding.se_limit must be positive".into());
        }
        for (name, v) in [("threshold", s.threshold), ("fallback_threshold", Some(s.fallback_threshold))] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return invalid(format!("seeding.{name} must be a non-negative number, got {v}"));
                }
            }
        }
        s.provider.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    pub fn stagnation_k(&self) -> usize {
        self.seeding
            .stagnation_k
            .unwrap_or_else(|| self.population_size.div_ceil(4))
    }

    pub fn seeds_per_round(&self) -> usize {
        self.seeding.seeds_per_round.unwrap_or_else(|| self.stagnation_k())
    }

    pub fn worker_count(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    /// Hash of the world block; runs are comparable only when these match.
    pub fn world_digest(&self) -> String {
        digest_json(&self.world)
    }

    pub fn config_digest(&self) -> String {
        digest_json(self)
    }
}

fn digest_json<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}
