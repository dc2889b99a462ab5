use std::io::Write;

use super::{NodeState, RunResult};
use crate::Result;

/// `meme_id,quality,popularity,birth_step,death_step,replica`
pub fn write_memes_csv<'a, W, I>(out: W, runs: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (usize, &'a RunResult)>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["meme_id", "quality", "popularity", "birth_step", "death_step", "replica"])?;
    for (replica, run) in runs {
        for r in &run.records {
            w.write_record([
                r.meme.id.to_string(),
                r.meme.quality.to_string(),
                r.popularity.to_string(),
                r.birth_step.to_string(),
                r.death_step.map(|d| d.to_string()).unwrap_or_default(),
                replica.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| crate::Error::io("<memes csv>", e))
}

/// `sample_step,entropy,distinct_memes,replica`
pub fn write_diversity_csv<'a, W, I>(out: W, runs: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (usize, &'a RunResult)>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_step", "entropy", "distinct_memes", "replica"])?;
    for (replica, run) in runs {
        for s in &run.diversity {
            w.write_record([
                s.step.to_string(),
                s.entropy.to_string(),
                s.distinct_memes.to_string(),
                replica.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| crate::Error::io("<diversity csv>", e))
}

/// `node_id,meme_id,quality`
pub fn write_node_states_csv<W: Write>(out: W, states: &[NodeState]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node_id", "meme_id", "quality"])?;
    for s in states {
        w.write_record([s.node.to_string(), s.meme.to_string(), s.quality.to_string()])?;
    }
    w.flush().map_err(|e| crate::Error::io("<node csv>", e))
}
