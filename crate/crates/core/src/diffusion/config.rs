use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calib::EmpiricalDist;
use crate::netgen::NetSpec;
use crate::scrolling::ScrollParams;
use crate::{Error, Result};

/// How each agent's information load is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    Fixed(f64),
    /// Drawn once per agent at initialisation.
    Empirical(Arc<EmpiricalDist>),
}

/// How feed capacity and the depth an agent looks at are set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Fixed(u32),
    /// Drawn per agent at initialisation, or per activation when
    /// `per_activation` is set (feeds then hold up to the support maximum).
    Empirical {
        dist: Arc<EmpiricalDist>,
        #[serde(default)]
        per_activation: bool,
    },
    /// Depth drawn per activation as a reshare-run length of the scrolling
    /// session model; feeds hold up to `ModelConfig::feed_cap` messages.
    Scrolling(ScrollParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SteadyStatePolicy {
    /// Steps between samples; `None` means one per agent (N steps).
    pub sample_interval: Option<u64>,
    pub window: usize,
    pub tolerance: f64,
    pub min_burn_in: usize,
    /// Step cap for reaching the steady state.
    pub max_steps: u64,
}

impl Default for SteadyStatePolicy {
    fn default() -> Self {
        SteadyStatePolicy {
            sample_interval: None,
            window: 20,
            tolerance: 0.02,
            min_burn_in: 50,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub net: NetSpec,
    pub mu_mode: MuMode,
    pub alpha_mode: AlphaMode,
    #[serde(default)]
    pub steady_state: SteadyStatePolicy,
    pub tracked_memes: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Step cap for the tracking phase, counted from the steady state.
    #[serde(default = "default_step_cap")]
    pub step_cap: u64,
    /// Feed storage for modes whose depth varies per activation.
    #[serde(default = "default_feed_cap")]
    pub feed_cap: usize,
}

fn default_step_cap() -> u64 {
    500_000_000
}

fn default_feed_cap() -> usize {
    512
}

impl ModelConfig {
    /// Fixed mu and alpha on a Barabási–Albert network with mean degree 2m.
    pub fn fixed(n: usize, m: usize, mu: f64, alpha: u32) -> Self {
        ModelConfig {
            net: NetSpec::barabasi_albert(n, m, 1),
            mu_mode: MuMode::Fixed(mu),
            alpha_mode: AlphaMode::Fixed(alpha),
            steady_state: SteadyStatePolicy::default(),
            tracked_memes: 10_000,
            replicas: 5,
            seed: 1,
            step_cap: default_step_cap(),
            feed_cap: default_feed_cap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        match &self.mu_mode {
            MuMode::Fixed(mu) if !(0.0..=1.0).contains(mu) => {
                return Err(Error::Config(format!("mu must lie in [0, 1] (got {mu})")));
            }
            MuMode::Empirical(d) => d.validate()?,
            _ => {}
        }
        match &self.alpha_mode {
            AlphaMode::Fixed(0) => return Err(Error::Config("alpha must be >= 1".into())),
            AlphaMode::Empirical { dist, .. } => {
                dist.validate()?;
                if dist.min() < 1.0 {
                    return Err(Error::Config("attention values must be >= 1".into()));
                }
            }
            AlphaMode::Scrolling(p) => p.validate()?,
            _ => {}
        }
        let ss = &self.steady_state;
        if ss.window < 2 {
            return Err(Error::Config("steady-state window must be >= 2".into()));
        }
        if !(ss.tolerance > 0.0) {
            return Err(Error::Config("steady-state tolerance must be > 0".into()));
        }
        if ss.sample_interval == Some(0) {
            return Err(Error::Config("sample interval must be >= 1".into()));
        }
        if self.tracked_memes < 1 {
            return Err(Error::Config("tracked_memes must be >= 1".into()));
        }
        if self.replicas < 1 {
            return Err(Error::Config("replicas must be >= 1".into()));
        }
        if self.feed_cap < 1 {
            return Err(Error::Config("feed_cap must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ModelConfig { seed, ..self.clone() }
    }
}
