use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentName;
use crate::diffusion::{AlphaMode, ModelConfig, MuMode, SteadyStatePolicy};
use crate::netgen::{Generator, NetSpec};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Seed stream reserved for the network; cell indices never reach it.
const NET_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// N = 1000, 5 replicas, 10k tracked memes per replica.
    Desk,
    /// N = 1000, 20 replicas, 100k tracked memes per replica.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub generator: Generator,
    pub n: usize,
    pub m: usize,
    pub triad_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub replicas: usize,
    pub tracked_memes: usize,
    pub feed_cap: usize,
    pub step_cap: u64,
    pub steady_state: SteadyStatePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub mu: Vec<f64>,
    pub alpha: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// `user_id,n_t,n_r` file; the shipped stand-in when absent.
    pub mu_csv: Option<PathBuf>,
    /// `session_id,stops` file; the shipped wide stand-in when absent.
    pub alpha_csv: Option<PathBuf>,
    /// Redraw attention on every activation instead of once per agent.
    pub per_activation: bool,
    pub reference_mu: f64,
    pub reference_alpha: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScrollingConfig {
    pub rho: f64,
    pub q_mean: f64,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub quality_bins: usize,
    pub group_threshold: f64,
    pub pdf_factor: f64,
}

/// Fully resolved experiment settings. Everything that can change an
/// output file lives here, so its hash identifies a result set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scale: Scale,
    pub network: NetworkConfig,
    pub run: RunConfig,
    pub grid: GridConfig,
    pub calibration: CalibrationConfig,
    pub scrolling: ScrollingConfig,
    pub analysis: AnalysisConfig,
}

pub fn fig3_mu_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).map(|m: f64| (m * 100.0).round() / 100.0).collect()
}

pub fn fig3_alpha_grid() -> Vec<u32> {
    vec![1, 2, 4, 8, 16, 32, 64]
}

impl ExperimentConfig {
    pub fn defaults(scale: Scale) -> Self {
        let (replicas, tracked_memes) = match scale {
            Scale::Desk => (5, 10_000),
            Scale::Full => (20, 100_000),
        };
        ExperimentConfig {
            seed: 1,
            scale,
            network: NetworkConfig {
                generator: Generator::BarabasiAlbert,
                n: 1000,
                m: 10,
                triad_prob: 0.0,
            },
            run: RunConfig {
                replicas,
                tracked_memes,
                feed_cap: 512,
                step_cap: 500_000_000,
                steady_state: SteadyStatePolicy::default(),
            },
            grid: GridConfig {
                mu: vec![0.1],
                alpha: vec![10],
            },
            calibration: CalibrationConfig {
                mu_csv: None,
                alpha_csv: None,
                per_activation: false,
                reference_mu: 0.05,
                reference_alpha: 64,
            },
            scrolling: ScrollingConfig {
                rho: 0.05,
                q_mean: 0.1,
                sigma: vec![0.0, 0.05, 0.1],
            },
            analysis: AnalysisConfig {
                quality_bins: 20,
                group_threshold: 0.34,
                pdf_factor: 2.0,
            },
        }
    }

    /// Defaults with the grid of the named experiment.
    pub fn preset(name: ExperimentName, scale: Scale) -> Self {
        let mut c = Self::defaults(scale);
        let (mu, alpha) = match name {
            ExperimentName::Fig1b | ExperimentName::Custom => (vec![0.1], vec![10]),
            ExperimentName::Fig2a => (vec![0.1, 0.25, 0.5, 0.75, 0.9], vec![10]),
            ExperimentName::Fig2b => (vec![0.1], vec![2, 8, 32, 64]),
            ExperimentName::Fig3a | ExperimentName::Fig3b => (fig3_mu_grid(), fig3_alpha_grid()),
            ExperimentName::Fig4a => {
                let mut mu: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
                mu.insert(0, 0.05);
                mu.push(1.0);
                (mu, vec![2, 8, 32, 64])
            }
            ExperimentName::Fig4b | ExperimentName::Fig4c | ExperimentName::Fig4d | ExperimentName::Fig5 => {
                (vec![], vec![])
            }
        };
        c.grid = GridConfig { mu, alpha };
        c
    }

    /// Deep-merges a TOML document over these settings. Keys absent from
    /// the document keep their current values.
    pub fn merge_toml(&self, text: &str) -> Result<Self> {
        let overlay: toml::Table = text.parse().map_err(|e| Error::Config(format!("config file: {e}")))?;
        let base = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let mut merged = toml::Value::Table(base);
        merge_value(&mut merged, toml::Value::Table(overlay));
        let c: ExperimentConfig = merged.try_into().map_err(|e| Error::Config(format!("config file: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn merge_file(&self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.net_spec().validate()?;
        if self.grid.mu.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::Config("grid mu values must lie in [0, 1]".into()));
        }
        if self.grid.alpha.contains(&0) {
            return Err(Error::Config("grid alpha values must be >= 1".into()));
        }
        if !(self.analysis.group_threshold > 0.0 && self.analysis.group_threshold < 1.0) {
            return Err(Error::Config("group_threshold must lie in (0, 1)".into()));
        }
        if self.analysis.quality_bins == 0 {
            return Err(Error::Config("quality_bins must be >= 1".into()));
        }
        self.model_config(MuMode::Fixed(0.5), AlphaMode::Fixed(1)).validate()
    }

    pub fn net_spec(&self) -> NetSpec {
        NetSpec {
            generator: self.network.generator,
            n: self.network.n,
            m: self.network.m,
            triad_prob: self.network.triad_prob,
            seed: derive_seed(self.seed, &[NET_STREAM]),
        }
    }

    /// Model settings for one cell; the seed is set per replica later.
    pub fn model_config(&self, mu_mode: MuMode, alpha_mode: AlphaMode) -> ModelConfig {
        ModelConfig {
            net: self.net_spec(),
            mu_mode,
            alpha_mode,
            steady_state: self.run.steady_state.clone(),
            tracked_memes: self.run.tracked_memes,
            replicas: self.run.replicas,
            seed: self.seed,
            step_cap: self.run.step_cap,
            feed_cap: self.run.feed_cap,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex_digest(&json)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn merge_value(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_value(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
