use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AlphaMode, ModelConfig, MuMode, SteadyStatePolicy};
use super::world::World;
use super::MemeRecord;
use crate::netgen::{Graph, NetSpec};
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversitySample {
    pub step: u64,
    pub entropy: f64,
    pub distinct_memes: usize,
}

/// Tracked meme records and post-steady-state diversity samples of one
/// replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub net: NetSpec,
    pub mu_mode: MuMode,
    pub alpha_mode: AlphaMode,
    pub seed: u64,
    pub steady_step: u64,
    pub total_steps: u64,
    pub records: Vec<MemeRecord>,
    pub diversity: Vec<DiversitySample>,
}

impl RunResult {
    pub fn mean_entropy(&self) -> f64 {
        if self.diversity.is_empty() {
            return 0.0;
        }
        self.diversity.iter().map(|s| s.entropy).sum::<f64>() / self.diversity.len() as f64
    }

    /// `(quality, popularity)` of every tracked meme.
    pub fn quality_popularity(&self) -> Vec<(f64, u64)> {
        self.records.iter().map(|r| (r.meme.quality, r.popularity)).collect()
    }

    pub fn popularities(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.popularity).collect()
    }
}

/// Declares the steady state once the mean distinct-meme count of the last
/// window differs from the window before it by less than the tolerance.
#[derive(Debug, Clone)]
pub struct SteadyStateDetector {
    window: usize,
    tolerance: f64,
    min_burn_in: usize,
    samples: Vec<f64>,
}

impl SteadyStateDetector {
    pub fn new(policy: &SteadyStatePolicy) -> Self {
        SteadyStateDetector {
            window: policy.window,
            tolerance: policy.tolerance,
            min_burn_in: policy.min_burn_in,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, distinct: f64) -> bool {
        self.samples.push(distinct);
        let k = self.samples.len();
        if k < self.min_burn_in.max(2 * self.window) {
            return false;
        }
        let w = self.window as f64;
        let recent = self.samples[k - self.window..].iter().sum::<f64>() / w;
        let before = self.samples[k - 2 * self.window..k - self.window].iter().sum::<f64>() / w;
        let scale = before.abs().max(recent.abs());
        if scale == 0.0 {
            return true;
        }
        (recent - before).abs() / scale < self.tolerance
    }
}

/// Runs one replica with `config.seed`: burn-in until the steady state,
/// then until `tracked_memes` memes born afterwards have all gone extinct.
pub fn run(config: &ModelConfig, graph: &Graph) -> Result<RunResult> {
    let mut world = World::new(config, graph)?;
    run_world(config, &mut world)
}

pub(crate) fn run_world(config: &ModelConfig, world: &mut World<'_>) -> Result<RunResult> {
    let interval = config
        .steady_state
        .sample_interval
        .unwrap_or(world.graph().node_count() as u64)
        .max(1);
    let mut detector = SteadyStateDetector::new(&config.steady_state);
    let cap = config.steady_state.max_steps;
    // with mu = 0 everywhere the only stationary state is fixation
    let no_injection = match &config.mu_mode {
        MuMode::Fixed(m) => *m == 0.0,
        MuMode::Empirical(_) => world.agent_mu().iter().all(|&m| m == 0.0),
    };

    loop {
        for _ in 0..interval {
            world.step();
        }
        let distinct = world.distinct_memes();
        let steady = if no_injection {
            distinct <= 1 && world.injection_impossible()
        } else {
            detector.push(distinct as f64)
        };
        if steady {
            break;
        }
        if world.step_count() >= cap {
            return Err(Error::SteadyStateNotReached { cap });
        }
    }

    let steady_step = world.step_count();
    let sample = |w: &World<'_>| DiversitySample {
        step: w.step_count(),
        entropy: w.entropy(),
        distinct_memes: w.distinct_memes(),
    };
    let mut diversity = vec![sample(world)];

    if no_injection {
        for _ in 1..config.steady_state.window {
            for _ in 0..interval {
                world.step();
            }
            diversity.push(sample(world));
        }
    } else {
        world.start_tracking();
        let mut since_sample = 0u64;
        loop {
            world.step();
            if world.tracked_born() >= config.tracked_memes {
                world.stop_tracking();
                if world.tracked_alive() == 0 {
                    break;
                }
            }
            since_sample += 1;
            if since_sample == interval {
                since_sample = 0;
                diversity.push(sample(world));
            }
            if world.step_count() - steady_step >= config.step_cap {
                return Err(Error::StepCapExceeded { cap: config.step_cap });
            }
        }
    }

    Ok(RunResult {
        net: config.net.clone(),
        mu_mode: config.mu_mode.clone(),
        alpha_mode: config.alpha_mode.clone(),
        seed: config.seed,
        steady_step,
        total_steps: world.step_count(),
        records: world.tracked_records(),
        diversity,
    })
}

/// Runs `config.replicas` replicas in parallel with seeds derived from
/// `config.seed` and the replica index.
pub fn run_replicas(config: &ModelConfig, graph: &Graph) -> Result<Vec<RunResult>> {
    (0..config.replicas)
        .into_par_iter()
        .map(|r| run(&config.with_seed(derive_seed(config.seed, &[r as u64])), graph))
        .collect()
}
