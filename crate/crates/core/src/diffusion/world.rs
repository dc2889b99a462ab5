use rand::Rng;

use super::config::{AlphaMode, ModelConfig, MuMode};
use super::feed::{Feed, Message};
use super::{Meme, MemeId, MemeRecord};
use crate::calib::Sampler;
use crate::metrics::entropy_of_counts;
use crate::netgen::{Graph, NodeId};
use crate::rng::{self, SimRng};
use crate::scrolling::{self, ScrollParams};
use crate::{Error, Result};

#[derive(Debug, Clone)]
struct MemeSlot {
    quality: f64,
    popularity: u64,
    birth: u64,
    death: Option<u64>,
    /// Messages carrying this meme across all feeds.
    live_count: u32,
    /// Index into `World::live` while `live_count > 0`.
    live_pos: u32,
    tracked: bool,
}

/// Depth an activated agent scans when resharing.
#[derive(Debug, Clone)]
enum Depth {
    /// The whole feed (capacity equals the agent's attention).
    WholeFeed,
    PerActivation(Sampler),
    Scrolling(ScrollParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareKind {
    Injected,
    /// Reshare branch hit an empty feed and injected instead.
    FallbackInjected,
    Reshared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub agent: NodeId,
    pub meme: MemeId,
    pub kind: ShareKind,
}

/// Per-node export row: the last meme each node shared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub node: NodeId,
    pub meme: MemeId,
    pub quality: f64,
}

/// Mutable state of one replica: feeds, the meme registry and the rng.
pub struct World<'g> {
    graph: &'g Graph,
    feeds: Vec<Feed>,
    mu: Vec<f64>,
    depth: Depth,
    memes: Vec<MemeSlot>,
    live: Vec<MemeId>,
    total_messages: u64,
    last_shared: Vec<Option<MemeId>>,
    step: u64,
    rng: SimRng,
    track_new: bool,
    tracked_alive: usize,
    tracked_born: usize,
    event_log: Option<Vec<(u64, MemeId)>>,
}

impl<'g> World<'g> {
    /// Empty feeds, per-agent traits drawn from `config` with `config.seed`.
    pub fn new(config: &ModelConfig, graph: &'g Graph) -> Result<Self> {
        config.validate()?;
        if graph.node_count() == 0 {
            return Err(Error::Config("graph has no nodes".into()));
        }
        let n = graph.node_count();
        let mut rng = rng::from_seed(config.seed);

        let mu = match &config.mu_mode {
            MuMode::Fixed(m) => vec![*m; n],
            MuMode::Empirical(d) => {
                let s = d.sampler();
                (0..n).map(|_| s.sample(&mut rng)).collect()
            }
        };
        let (capacities, depth): (Vec<usize>, Depth) = match &config.alpha_mode {
            AlphaMode::Fixed(a) => (vec![*a as usize; n], Depth::WholeFeed),
            AlphaMode::Empirical { dist, per_activation: false } => {
                let s = dist.sampler();
                ((0..n).map(|_| s.sample(&mut rng) as usize).collect(), Depth::WholeFeed)
            }
            AlphaMode::Empirical { dist, per_activation: true } => {
                let cap = (dist.max() as usize).min(config.feed_cap);
                (vec![cap; n], Depth::PerActivation(dist.sampler()))
            }
            AlphaMode::Scrolling(p) => (vec![config.feed_cap; n], Depth::Scrolling(*p)),
        };

        Ok(World {
            graph,
            feeds: capacities.into_iter().map(Feed::new).collect(),
            mu,
            depth,
            memes: Vec::new(),
            live: Vec::new(),
            total_messages: 0,
            last_shared: vec![None; n],
            step: 0,
            rng,
            track_new: false,
            tracked_alive: 0,
            tracked_born: 0,
            event_log: None,
        })
    }

    /// Records every share event for later auditing.
    pub fn enable_event_log(&mut self) {
        self.event_log.get_or_insert_with(Vec::new);
    }

    pub fn event_log(&self) -> Option<&[(u64, MemeId)]> {
        self.event_log.as_deref()
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn feed(&self, node: NodeId) -> &Feed {
        &self.feeds[node as usize]
    }

    pub fn agent_mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn feed_capacities(&self) -> Vec<usize> {
        self.feeds.iter().map(Feed::capacity).collect()
    }

    /// Memes currently carried by at least one feed message.
    pub fn distinct_memes(&self) -> usize {
        self.live.len()
    }

    pub fn total_messages(&self) -> u64 {
        self.total_messages
    }

    pub fn memes_created(&self) -> usize {
        self.memes.len()
    }

    pub fn meme(&self, id: MemeId) -> Meme {
        Meme { id, quality: self.memes[id as usize].quality }
    }

    pub fn popularity(&self, id: MemeId) -> u64 {
        self.memes[id as usize].popularity
    }

    pub fn is_alive(&self, id: MemeId) -> bool {
        self.memes[id as usize].death.is_none()
    }

    /// Message count per live meme, in registry order of the live set.
    pub fn feed_meme_counts(&self) -> Vec<(MemeId, u64)> {
        self.live
            .iter()
            .map(|&id| (id, self.memes[id as usize].live_count as u64))
            .collect()
    }

    /// Entropy of the meme mix over all feed messages; 0 for empty feeds.
    pub fn entropy(&self) -> f64 {
        if self.total_messages == 0 {
            return 0.0;
        }
        let counts: Vec<u64> = self
            .live
            .iter()
            .map(|&id| self.memes[id as usize].live_count as u64)
            .collect();
        entropy_of_counts(&counts, self.total_messages)
    }

    /// True when no agent can ever introduce a meme again.
    pub(crate) fn injection_impossible(&self) -> bool {
        self.mu.iter().all(|&m| m == 0.0) && self.feeds.iter().all(|f| !f.is_empty())
    }

    pub fn snapshot_node_states(&self) -> Vec<NodeState> {
        self.last_shared
            .iter()
            .enumerate()
            .filter_map(|(node, m)| {
                m.map(|id| NodeState {
                    node: node as NodeId,
                    meme: id,
                    quality: self.memes[id as usize].quality,
                })
            })
            .collect()
    }

    pub(crate) fn start_tracking(&mut self) {
        self.track_new = true;
    }

    pub(crate) fn stop_tracking(&mut self) {
        self.track_new = false;
    }

    pub(crate) fn tracked_born(&self) -> usize {
        self.tracked_born
    }

    pub(crate) fn tracked_alive(&self) -> usize {
        self.tracked_alive
    }

    pub(crate) fn tracked_records(&self) -> Vec<MemeRecord> {
        self.memes
            .iter()
            .enumerate()
            .filter(|(_, s)| s.tracked)
            .map(|(id, s)| MemeRecord {
                meme: Meme { id: id as MemeId, quality: s.quality },
                popularity: s.popularity,
                birth_step: s.birth,
                death_step: s.death,
                tracked: true,
            })
            .collect()
    }

    fn new_meme(&mut self) -> MemeId {
        // uniform on (0, 1]
        let quality = 1.0 - self.rng.random::<f64>();
        let id = self.memes.len() as MemeId;
        let tracked = self.track_new;
        if tracked {
            self.tracked_born += 1;
            self.tracked_alive += 1;
        }
        self.memes.push(MemeSlot {
            quality,
            popularity: 0,
            birth: self.step,
            death: None,
            live_count: 0,
            live_pos: 0,
            tracked,
        });
        id
    }

    /// Picks a message from the top of `agent`'s feed with probability
    /// proportional to the quality of the meme it carries.
    fn select(&mut self, agent: usize) -> Option<MemeId> {
        let len = self.feeds[agent].len();
        if len == 0 {
            return None;
        }
        let depth = match &self.depth {
            Depth::WholeFeed => len,
            Depth::PerActivation(s) => s.sample(&mut self.rng) as usize,
            Depth::Scrolling(p) => scrolling::sample_run_length(p, &mut self.rng).min(len as u64) as usize,
        }
        .clamp(1, len);
        Some(select_weighted(
            self.feeds[agent].top(depth).map(|m| (m.meme, self.memes[m.meme as usize].quality)),
            &mut self.rng,
        ))
    }

    fn add_live(&mut self, id: MemeId) {
        let slot = &mut self.memes[id as usize];
        if slot.live_count == 0 {
            slot.live_pos = self.live.len() as u32;
            self.live.push(id);
        }
        slot.live_count += 1;
        self.total_messages += 1;
    }

    fn remove_live(&mut self, id: MemeId) {
        self.total_messages -= 1;
        let slot = &mut self.memes[id as usize];
        slot.live_count -= 1;
        if slot.live_count == 0 {
            let pos = slot.live_pos as usize;
            self.live.swap_remove(pos);
            if let Some(&moved) = self.live.get(pos) {
                self.memes[moved as usize].live_pos = pos as u32;
            }
            self.kill(id);
        }
    }

    fn kill(&mut self, id: MemeId) {
        let step = self.step;
        let slot = &mut self.memes[id as usize];
        if slot.death.is_none() {
            slot.death = Some(step);
            if slot.tracked {
                self.tracked_alive -= 1;
            }
        }
    }

    /// One agent activation.
    pub fn step(&mut self) -> StepOutcome {
        self.step += 1;
        let n = self.feeds.len();
        let agent = self.rng.random_range(0..n);
        let mu = self.mu[agent];
        let inject = mu >= 1.0 || (mu > 0.0 && self.rng.random::<f64>() < mu);

        let (meme, kind) = if inject {
            (self.new_meme(), ShareKind::Injected)
        } else {
            match self.select(agent) {
                Some(m) => (m, ShareKind::Reshared),
                None => (self.new_meme(), ShareKind::FallbackInjected),
            }
        };

        self.memes[meme as usize].popularity += 1;
        self.last_shared[agent] = Some(meme);
        if let Some(log) = self.event_log.as_mut() {
            log.push((self.step, meme));
        }

        let msg = Message { meme, created_step: self.step };
        let graph = self.graph;
        for &nb in graph.neighbors(agent as NodeId) {
            self.add_live(meme);
            if let Some(old) = self.feeds[nb as usize].push(msg) {
                self.remove_live(old.meme);
            }
        }
        if self.memes[meme as usize].live_count == 0 {
            // isolated agent: the message reached nobody
            self.kill(meme);
        }

        StepOutcome {
            agent: agent as NodeId,
            meme,
            kind,
        }
    }
}

/// Roulette-wheel choice over `(id, weight)` candidates; duplicates each
/// count separately.
pub fn select_weighted<I, R>(candidates: I, rng: &mut R) -> MemeId
where
    I: Iterator<Item = (MemeId, f64)> + Clone,
    R: Rng + ?Sized,
{
    let total: f64 = candidates.clone().map(|c| c.1).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (id, w) in candidates {
        if u < w {
            return id;
        }
        u -= w;
        last = Some(id);
    }
    last.expect("non-empty candidate set")
}
