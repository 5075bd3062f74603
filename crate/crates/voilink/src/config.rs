//! TOML run configuration.
//!
//! One file drives every subcommand: the `[sim]` table describes the link,
//! `[ppo]` the optimizer, `[train]` the training driver, and `[sweep]` the
//! constraint sweep. Every field has a default, so an empty file is a
//! complete (and sensible) configuration; unknown keys are rejected rather
//! than silently ignored, since a typoed knob that does nothing is worse
//! than an error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{SimConfig, SweepOptions, TrainOptions};
use crate::error::{Error, Result};
use crate::policy::PpoConfig;

/// Sweep-specific settings layered on top of `[train]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Quality floors to sweep, strictly ascending, in dB.
    pub d_mins_db: Vec<f64>,
    /// Also evaluate every fixed rate and the threshold heuristic.
    pub include_baselines: bool,
    /// Multiplier step size for the sweep's constrained training; `0`
    /// keeps lambda fixed at its configured value. The sweep defaults to
    /// adaptive multipliers even when plain training keeps lambda fixed.
    pub dual_ascent_rate: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            d_mins_db: vec![21.0, 23.0, 25.0, 27.0],
            include_baselines: true,
            dual_ascent_rate: 0.01,
        }
    }
}

/// Evaluation batch settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Independent episodes per evaluation.
    pub episodes: usize,
    /// Seed of the evaluation episode streams (distinct from the run seed
    /// so evaluation never replays training episodes).
    pub seed: u64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            episodes: 4,
            seed: 1_000_003,
        }
    }
}

/// The whole configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    pub sim: SimConfig,
    pub ppo: PpoConfig,
    pub train: TrainOptions,
    pub eval: EvalSection,
    pub sweep: SweepSection,
}

impl AppConfig {
    /// Parse a TOML document. An empty string yields the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            message: e.to_string(),
        })
    }

    /// Load and parse a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    /// Serialize back to TOML (the manifest embeds this echo).
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config {
            message: e.to_string(),
        })
    }

    /// Validate every section; returns the accumulated warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = self.sim.validate()?;
        self.ppo.validate()?;
        if self.train.episode_decisions == 0 {
            return Err(Error::InvalidParameter {
                name: "train.episode_decisions",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        if self.eval.episodes == 0 {
            return Err(Error::InvalidParameter {
                name: "eval.episodes",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        if self.sweep.d_mins_db.is_empty() {
            return Err(Error::EmptyInput {
                what: "sweep.d_mins_db",
            });
        }
        for pair in self.sweep.d_mins_db.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidParameter {
                    name: "sweep.d_mins_db",
                    value: pair[1],
                    constraint: "strictly ascending",
                });
            }
        }
        if !(self.sweep.dual_ascent_rate >= 0.0) || !self.sweep.dual_ascent_rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sweep.dual_ascent_rate",
                value: self.sweep.dual_ascent_rate,
                constraint: "finite and >= 0 (0 keeps lambda fixed)",
            });
        }
        if let Some(rate) = self.train.dual_ascent_rate {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "train.dual_ascent_rate",
                    value: rate,
                    constraint: "finite and > 0",
                });
            }
        }
        Ok(warnings.drain(..).collect())
    }

    /// The sweep driver's options assembled from `[train]` and `[sweep]`.
    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            train: TrainOptions {
                dual_ascent_rate: (self.sweep.dual_ascent_rate > 0.0)
                    .then_some(self.sweep.dual_ascent_rate),
                ..self.train.clone()
            },
            eval_episodes: self.eval.episodes,
            include_baselines: self.sweep.include_baselines,
        }
    }
}
