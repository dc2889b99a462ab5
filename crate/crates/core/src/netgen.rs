//! Synthetic undirected social networks.
//!
//! Barabási–Albert graphs grow from an `m`-node clique; each new node links
//! to `m` distinct existing nodes chosen with probability proportional to
//! degree. The Holme–Kim variant replaces some of those attachments with a
//! triad-closure step, which raises clustering without changing the degree
//! sequence budget.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    BarabasiAlbert,
    HolmeKim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub generator: Generator,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub triad_prob: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NetSpec {
    pub fn barabasi_albert(n: usize, m: usize, seed: u64) -> Self {
        NetSpec {
            generator: Generator::BarabasiAlbert,
            n,
            m,
            triad_prob: 0.0,
            seed,
        }
    }

    pub fn holme_kim(n: usize, m: usize, triad_prob: f64, seed: u64) -> Self {
        NetSpec {
            generator: Generator::HolmeKim,
            n,
            m,
            triad_prob,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m >= self.n {
            return Err(Error::Config(format!(
                "network requires 1 <= m < n (got m={}, n={})",
                self.m, self.n
            )));
        }
        if self.n > NodeId::MAX as usize {
            return Err(Error::Config(format!("too many nodes: {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.triad_prob) {
            return Err(Error::Config(format!(
                "triad_prob must lie in [0, 1] (got {})",
                self.triad_prob
            )));
        }
        Ok(())
    }
}

/// Immutable simple undirected graph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Self-loops and duplicate
    /// edges are rejected.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            if a as usize >= node_count || b as usize >= node_count {
                return Err(Error::Input(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if a == b {
                return Err(Error::Input(format!("self-loop at node {a}")));
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        Self::from_adjacency(adj)
    }

    fn from_adjacency(mut adj: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut neighbors = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        offsets.push(0);
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Input(format!("duplicate edge at node {i}")));
            }
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Ok(Graph { offsets, neighbors })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        let i = node as usize;
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn mean_degree(&self) -> f64 {
        if self.node_count() == 0 {
            return 0.0;
        }
        self.neighbors.len() as f64 / self.node_count() as f64
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i, j))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0 as NodeId];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Writes one `i j` line per undirected edge.
    pub fn write_edge_list<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "# nodes {}", self.node_count())?;
        for (a, b) in self.edges() {
            writeln!(out, "{a} {b}")?;
        }
        out.flush()
    }

    /// Reads an edge list. The node count is taken from a `# nodes N` header
    /// when present, otherwise from the largest id seen.
    pub fn read_edge_list<R: Read>(input: R) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        let mut max_id: Option<NodeId> = None;
        for (lineno, line) in BufReader::new(input).lines().enumerate() {
            let line = line.map_err(|e| Error::io("<edge list>", e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.trim().strip_prefix("nodes") {
                    declared = Some(n.trim().parse::<usize>().map_err(|_| {
                        Error::Input(format!("line {}: bad node count", lineno + 1))
                    })?);
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<NodeId> {
                tok.and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Input(format!("line {}: expected `i j`", lineno + 1)))
            };
            let a = parse(parts.next())?;
            let b = parse(parts.next())?;
            max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
            edges.push((a, b));
        }
        let n = declared.unwrap_or_else(|| max_id.map_or(0, |m| m as usize + 1));
        Graph::from_edges(n, &edges)
    }
}

/// Generates a graph according to `spec`. Deterministic in `spec.seed`.
pub fn generate(spec: &NetSpec) -> Result<Graph> {
    spec.validate()?;
    let mut rng = rng::from_seed(spec.seed);
    let n = spec.n;
    let m = spec.m;
    let triad_prob = match spec.generator {
        Generator::BarabasiAlbert => 0.0,
        Generator::HolmeKim => spec.triad_prob,
    };

    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    // every edge endpoint once, so a uniform pick is degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * m * n);

    for i in 0..m {
        for j in (i + 1)..m {
            adj[i].push(j as NodeId);
            adj[j].push(i as NodeId);
            endpoints.push(i as NodeId);
            endpoints.push(j as NodeId);
        }
    }

    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for new in m..n {
        targets.clear();
        let mut last_pa: Option<NodeId> = None;
        while targets.len() < m {
            let triad = match last_pa {
                Some(anchor) if triad_prob > 0.0 && rng.random::<f64>() < triad_prob => {
                    let candidates: Vec<NodeId> = adj[anchor as usize]
                        .iter()
                        .copied()
                        .filter(|c| !targets.contains(c))
                        .collect();
                    if candidates.is_empty() {
                        None
                    } else {
                        Some(candidates[rng.random_range(0..candidates.len())])
                    }
                }
                _ => None,
            };
            let pick = match triad {
                Some(t) => t,
                None => {
                    let t = if endpoints.is_empty() {
                        rng.random_range(0..new) as NodeId
                    } else {
                        endpoints[rng.random_range(0..endpoints.len())]
                    };
                    if targets.contains(&t) {
                        continue;
                    }
                    last_pa = Some(t);
                    t
                }
            };
            targets.push(pick);
        }
        for &t in &targets {
            adj[new].push(t);
            adj[t as usize].push(new as NodeId);
            endpoints.push(new as NodeId);
            endpoints.push(t);
        }
    }

    Graph::from_adjacency(adj)
}

/// Average local clustering coefficient; nodes of degree < 2 contribute 0.
pub fn clustering_coefficient(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for v in 0..n as NodeId {
        let nbrs = g.neighbors(v);
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for (ix, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[ix + 1..] {
                if g.has_edge(a, b) {
                    links += 1;
                }
            }
        }
        total += 2.0 * links as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}
