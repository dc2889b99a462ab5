//! Meme-sharing dynamics on a fixed network.
//!
//! Each step activates one agent uniformly at random. With probability
//! `mu` it posts a new meme of uniform quality; otherwise it reshares a
//! message from its feed, chosen with probability proportional to the
//! meme's quality. The message lands on top of every neighbour's feed and
//! the oldest message falls off when a feed exceeds its capacity.

mod config;
mod export;
mod feed;
mod run;
mod world;

use serde::{Deserialize, Serialize};

pub use config::{AlphaMode, ModelConfig, MuMode, SteadyStatePolicy};
pub use export::{write_diversity_csv, write_memes_csv, write_node_states_csv};
pub use feed::{Feed, Message};
pub use run::{run, run_replicas, DiversitySample, RunResult, SteadyStateDetector};
pub use world::{select_weighted, NodeState, ShareKind, StepOutcome, World};

pub type MemeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Meme {
    pub id: MemeId,
    pub quality: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemeRecord {
    pub meme: Meme,
    /// Injection plus every reshare.
    pub popularity: u64,
    pub birth_step: u64,
    pub death_step: Option<u64>,
    pub tracked: bool,
}

#[cfg(test)]
mod tests;
