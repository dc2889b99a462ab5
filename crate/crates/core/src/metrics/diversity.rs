//! Shannon diversity of the meme mix across all feeds.

use crate::diffusion::RunResult;
use crate::{Error, Result};

/// Entropy (nats) of the distribution given by per-meme message counts.
pub fn diversity_entropy<I>(counts: I) -> Result<f64>
where
    I: IntoIterator<Item = u64>,
{
    let counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Domain("entropy of an empty snapshot".into()));
    }
    Ok(entropy_of_counts(&counts, total))
}

pub(crate) fn entropy_of_counts(counts: &[u64], total: u64) -> f64 {
    let t = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

/// Time-averaged entropy of a run divided by that of its mu = 1 baseline.
pub fn normalized_diversity(run: &RunResult, baseline: &RunResult) -> Result<f64> {
    if run.net != baseline.net {
        return Err(Error::Config("baseline uses a different network".into()));
    }
    if run.alpha_mode != baseline.alpha_mode {
        return Err(Error::Config("baseline uses a different attention mode".into()));
    }
    let denom = baseline.mean_entropy();
    if !(denom > 0.0) {
        return Err(Error::Domain("baseline entropy is zero".into()));
    }
    Ok(run.mean_entropy() / denom)
}
