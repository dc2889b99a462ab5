use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::diffusion::{self, AlphaMode, MuMode};
use crate::metrics::discriminative_power;
use crate::netgen::Graph;
use crate::rng::derive_seed;
use crate::{Error, Result};

/// One point of a sweep: a load setting and an attention setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub label: String,
    pub mu_mode: MuMode,
    pub alpha_mode: AlphaMode,
}

impl Cell {
    pub fn fixed(mu: f64, alpha: u32) -> Self {
        Cell {
            label: format!("mu={mu},alpha={alpha}"),
            mu_mode: MuMode::Fixed(mu),
            alpha_mode: AlphaMode::Fixed(alpha),
        }
    }

    /// `mu` as a number, or NaN for distributional load.
    pub fn mu_value(&self) -> f64 {
        match self.mu_mode {
            MuMode::Fixed(m) => m,
            MuMode::Empirical(_) => f64::NAN,
        }
    }

    pub fn alpha_label(&self) -> String {
        match &self.alpha_mode {
            AlphaMode::Fixed(a) => a.to_string(),
            AlphaMode::Empirical { .. } => "empirical".into(),
            AlphaMode::Scrolling(p) => format!("scrolling(q={},sigma={})", p.q_mean, p.sigma),
        }
    }

    pub fn mu_label(&self) -> String {
        match self.mu_mode {
            MuMode::Fixed(m) => m.to_string(),
            MuMode::Empirical(_) => "empirical".into(),
        }
    }
}

/// Full cross product of the configured grid, load varying fastest.
pub fn grid_cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &a in &config.grid.alpha {
        for &m in &config.grid.mu {
            cells.push(Cell::fixed(m, a));
        }
    }
    cells
}

/// Compact outcome of one replica of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaSummary {
    pub cell: usize,
    pub replica: usize,
    pub seed: u64,
    /// Absent when every tracked meme has the same popularity.
    pub tau: Option<f64>,
    pub mean_entropy: f64,
    pub records: usize,
    pub steady_step: u64,
    pub total_steps: u64,
    /// Counts of popularity in `[2^k, 2^(k+1))`.
    pub histogram: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub index: usize,
    pub cell: Cell,
    pub replicas: Vec<ReplicaSummary>,
    /// Tau over all replicas' records pooled together.
    pub tau_pooled: Option<f64>,
    pub tau_mean: Option<f64>,
    pub tau_std: Option<f64>,
    pub mean_entropy: f64,
    pub normalized_entropy: Option<f64>,
    pub histogram: Vec<u64>,
    /// Pooled `(quality, popularity)` pairs when requested.
    pub records: Option<Vec<(f64, u64)>>,
    pub wall_ms: u128,
}

/// `[2^k, 2^(k+1))` bin counts.
pub fn log2_histogram(popularities: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut h: Vec<u64> = Vec::new();
    for p in popularities.into_iter().filter(|&p| p >= 1) {
        let k = 63 - p.leading_zeros() as usize;
        if h.len() <= k {
            h.resize(k + 1, 0);
        }
        h[k] += 1;
    }
    h
}

pub fn sum_histograms<'a>(hs: impl IntoIterator<Item = &'a Vec<u64>>) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for h in hs {
        if out.len() < h.len() {
            out.resize(h.len(), 0);
        }
        for (o, c) in out.iter_mut().zip(h) {
            *o += c;
        }
    }
    out
}

/// Mean and sample standard deviation of the defined values.
pub fn mean_std(values: impl IntoIterator<Item = Option<f64>>) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.len() > 1).then(|| (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), std)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Keep pooled records on each result.
    pub keep_records: bool,
    /// Normalise entropy by a mu = 1 run at the same attention setting.
    pub normalize: bool,
}

pub struct SweepOutput {
    pub results: Vec<SweepResult>,
    /// Extra mu = 1 cells run only as normalisation baselines.
    pub baselines: Vec<SweepResult>,
}

/// Runs every cell and replica on the current rayon pool. Replica `r` of
/// the cell at position `i` is seeded with `derive_seed(seed, [i, r])`, so
/// outputs do not depend on scheduling.
pub fn run_sweep(config: &ExperimentConfig, graph: &Graph, cells: &[Cell], opts: SweepOptions) -> Result<SweepOutput> {
    let mut all: Vec<Cell> = cells.to_vec();
    // baseline for each attention setting: an existing mu = 1 cell, else an extra one
    let mut baseline_of: Vec<usize> = Vec::with_capacity(cells.len());
    if opts.normalize {
        for c in cells {
            let found = all
                .iter()
                .position(|b| b.mu_mode == MuMode::Fixed(1.0) && b.alpha_mode == c.alpha_mode);
            let ix = found.unwrap_or_else(|| {
                all.push(Cell {
                    label: format!("baseline:{}", c.alpha_label()),
                    mu_mode: MuMode::Fixed(1.0),
                    alpha_mode: c.alpha_mode.clone(),
                });
                all.len() - 1
            });
            baseline_of.push(ix);
        }
    }

    let mut results: Vec<SweepResult> = all
        .par_iter()
        .enumerate()
        .map(|(i, cell)| run_cell(config, graph, i, cell, opts.keep_records))
        .collect::<Result<_>>()?;

    if opts.normalize {
        for (i, &b) in baseline_of.iter().enumerate() {
            let base = results[b].mean_entropy;
            results[i].normalized_entropy = (base > 0.0).then(|| results[i].mean_entropy / base);
        }
        for b in cells.len()..results.len() {
            results[b].normalized_entropy = Some(1.0);
        }
    }
    let baselines = results.split_off(cells.len());
    Ok(SweepOutput { results, baselines })
}

fn run_cell(config: &ExperimentConfig, graph: &Graph, index: usize, cell: &Cell, keep: bool) -> Result<SweepResult> {
    let start = std::time::Instant::now();
    let model = config.model_config(cell.mu_mode.clone(), cell.alpha_mode.clone());
    model.validate()?;
    let runs: Vec<(ReplicaSummary, Vec<(f64, u64)>)> = (0..model.replicas)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(config.seed, &[index as u64, r as u64]);
            let res = diffusion::run(&model.with_seed(seed), graph).map_err(|e| Error::Cell {
                cell: index,
                replica: r,
                source: Box::new(e),
            })?;
            let pairs = res.quality_popularity();
            let summary = ReplicaSummary {
                cell: index,
                replica: r,
                seed,
                tau: discriminative_power(&pairs).ok(),
                mean_entropy: res.mean_entropy(),
                records: pairs.len(),
                steady_step: res.steady_step,
                total_steps: res.total_steps,
                histogram: log2_histogram(res.popularities()),
            };
            Ok((summary, pairs))
        })
        .collect::<Result<_>>()?;

    let (replicas, pair_sets): (Vec<ReplicaSummary>, Vec<Vec<(f64, u64)>>) = runs.into_iter().unzip();
    let pooled: Vec<(f64, u64)> = pair_sets.into_iter().flatten().collect();
    let (tau_mean, tau_std) = mean_std(replicas.iter().map(|r| r.tau));
    let mean_entropy = replicas.iter().map(|r| r.mean_entropy).sum::<f64>() / replicas.len() as f64;
    Ok(SweepResult {
        index,
        cell: cell.clone(),
        tau_pooled: discriminative_power(&pooled).ok(),
        tau_mean,
        tau_std,
        mean_entropy,
        normalized_entropy: None,
        histogram: sum_histograms(replicas.iter().map(|r| &r.histogram)),
        replicas,
        records: keep.then_some(pooled),
        wall_ms: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bins() {
        assert_eq!(log2_histogram([1, 1, 2, 3, 4, 7, 8]), vec![2, 2, 2, 1]);
        assert!(log2_histogram([]).is_empty());
        assert_eq!(sum_histograms([&vec![1, 2], &vec![0, 1, 5]]), vec![1, 3, 5]);
    }

    #[test]
    fn mean_std_skips_undefined() {
        assert_eq!(mean_std([None, None]), (None, None));
        assert_eq!(mean_std([Some(2.0), None]), (Some(2.0), None));
        let (m, s) = mean_std([Some(1.0), Some(3.0)]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
