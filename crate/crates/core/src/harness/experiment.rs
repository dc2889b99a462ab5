use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::calibration::{calibration_report, load_distributions, scrolling_dynamics_experiment, CalibrationReport};
use super::config::ExperimentConfig;
use super::output::{opt, CellSeeds, Manifest, OutputDir};
use super::sweep::{grid_cells, run_sweep, SweepOptions, SweepResult};
use crate::calib::{ingest_alpha, standin, EmpiricalDist};
use crate::metrics::{
    ccdf, fit_power_law, log_binned_pdf, mean_popularity_by_quality, popularity_by_quality_group, PowerLawFit,
};
use crate::netgen::{generate, Graph};
use crate::rng::{derive_seed, from_seed};
use crate::scrolling::{self, FitReport, FitTarget, SearchGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig5,
    Custom,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 11] = [
        ExperimentName::Fig1b,
        ExperimentName::Fig2a,
        ExperimentName::Fig2b,
        ExperimentName::Fig3a,
        ExperimentName::Fig3b,
        ExperimentName::Fig4a,
        ExperimentName::Fig4b,
        ExperimentName::Fig4c,
        ExperimentName::Fig4d,
        ExperimentName::Fig5,
        ExperimentName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Fig1b => "fig1b",
            ExperimentName::Fig2a => "fig2a",
            ExperimentName::Fig2b => "fig2b",
            ExperimentName::Fig3a => "fig3a",
            ExperimentName::Fig3b => "fig3b",
            ExperimentName::Fig4a => "fig4a",
            ExperimentName::Fig4b => "fig4b",
            ExperimentName::Fig4c => "fig4c",
            ExperimentName::Fig4d => "fig4d",
            ExperimentName::Fig5 => "fig5",
            ExperimentName::Custom => "custom",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentName::Fig1b => "popularity distribution and power-law fit",
            ExperimentName::Fig2a => "mean popularity vs quality across load",
            ExperimentName::Fig2b => "mean popularity vs quality across attention",
            ExperimentName::Fig3a => "discriminative power over the load x attention grid",
            ExperimentName::Fig3b => "normalised diversity over the load x attention grid",
            ExperimentName::Fig4a => "diversity vs discriminative power tradeoff curves",
            ExperimentName::Fig4b => "scrolling-model fit to the load distribution",
            ExperimentName::Fig4c => "scrolling-model fits to attention and tau vs sigma",
            ExperimentName::Fig4d => "naive vs distributional calibration",
            ExperimentName::Fig5 => "popularity by quality group",
            ExperimentName::Custom => "user-defined grid",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

const TAU_HEADER: [&str; 7] = ["cell", "mu", "alpha", "replicas", "tau_pooled", "tau_mean", "tau_std"];

fn write_tau(out: &mut OutputDir, results: &[SweepResult]) -> Result<()> {
    out.write_csv("tau.csv", &TAU_HEADER, |w| {
        for r in results {
            w.write_record([
                r.index.to_string(),
                r.cell.mu_label(),
                r.cell.alpha_label(),
                r.replicas.len().to_string(),
                opt(r.tau_pooled),
                opt(r.tau_mean),
                opt(r.tau_std),
            ])?;
        }
        Ok(())
    })
}

fn write_replicas(out: &mut OutputDir, results: &[&SweepResult]) -> Result<()> {
    let header = [
        "cell", "mu", "alpha", "replica", "seed", "tau", "mean_entropy", "records", "steady_step", "total_steps",
    ];
    out.write_csv("replicas.csv", &header, |w| {
        for r in results {
            for s in &r.replicas {
                w.write_record([
                    r.index.to_string(),
                    r.cell.mu_label(),
                    r.cell.alpha_label(),
                    s.replica.to_string(),
                    s.seed.to_string(),
                    opt(s.tau),
                    s.mean_entropy.to_string(),
                    s.records.to_string(),
                    s.steady_step.to_string(),
                    s.total_steps.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn write_histograms(out: &mut OutputDir, results: &[SweepResult]) -> Result<()> {
    let header = ["cell", "mu", "alpha", "bin_lo", "bin_hi", "count"];
    out.write_csv("popularity_hist.csv", &header, |w| {
        for r in results {
            for (k, c) in r.histogram.iter().enumerate() {
                w.write_record([
                    r.index.to_string(),
                    r.cell.mu_label(),
                    r.cell.alpha_label(),
                    (1u64 << k).to_string(),
                    (1u64 << (k + 1)).to_string(),
                    c.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn write_diversity(out: &mut OutputDir, name: &str, results: &[SweepResult]) -> Result<()> {
    let header = ["cell", "mu", "alpha", "mean_entropy", "normalized_entropy", "tau_mean", "tau_pooled"];
    out.write_csv(name, &header, |w| {
        for r in results {
            w.write_record([
                r.index.to_string(),
                r.cell.mu_label(),
                r.cell.alpha_label(),
                r.mean_entropy.to_string(),
                opt(r.normalized_entropy),
                opt(r.tau_mean),
                opt(r.tau_pooled),
            ])?;
        }
        Ok(())
    })
}

fn records(r: &SweepResult) -> &[(f64, u64)] {
    r.records.as_deref().unwrap_or_default()
}

fn tau_line(r: &SweepResult) -> String {
    let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into());
    format!(
        "{:<28} tau_mean={} (sd {}) tau_pooled={} H={:.4}{}",
        r.cell.label,
        f(r.tau_mean),
        f(r.tau_std),
        f(r.tau_pooled),
        r.mean_entropy,
        r.normalized_entropy.map(|h| format!(" H/H1={h:.4}")).unwrap_or_default()
    )
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    out: OutputDir,
    summary: String,
    seeds: Vec<CellSeeds>,
}

impl Ctx<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        self.summary.push_str(s.as_ref());
        self.summary.push('\n');
    }

    fn record_seeds(&mut self, results: &[SweepResult]) {
        for r in results {
            self.seeds.push(CellSeeds {
                cell: r.index,
                label: r.cell.label.clone(),
                seeds: r.replicas.iter().map(|s| s.seed).collect(),
            });
        }
    }

    fn graph(&self) -> Result<Graph> {
        generate(&self.config.net_spec())
    }
}

/// Runs a named experiment into `out_dir` on a pool of `jobs` workers and
/// returns the manifest written alongside the results.
pub fn run_experiment(name: ExperimentName, config: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<Manifest> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let mut ctx = Ctx {
        config,
        out: OutputDir::create(out_dir)?,
        summary: String::new(),
        seeds: Vec::new(),
    };
    ctx.line(format!("experiment {name}: {}", name.describe()));
    ctx.line(format!(
        "seed {} | network {:?} n={} m={} | replicas {} | tracked memes {}",
        config.seed, config.network.generator, config.network.n, config.network.m, config.run.replicas, config.run.tracked_memes
    ));
    pool.install(|| dispatch(name, &mut ctx))?;
    let wall = start.elapsed().as_secs_f64();
    let _ = writeln!(ctx.summary, "wall time {wall:.1} s");

    let Ctx {
        mut out, summary, seeds, ..
    } = ctx;
    out.write_bytes("summary.txt", summary.as_bytes())?;
    let manifest = Manifest {
        tool: "memesim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: name.to_string(),
        master_seed: config.seed,
        network_seed: config.net_spec().seed,
        config_hash: config.hash(),
        config: serde_json::to_value(config)?,
        jobs: jobs.max(1),
        wall_time_secs: wall,
        cells: seeds,
        files: Vec::new(),
    };
    out.finish(manifest)
}

fn dispatch(name: ExperimentName, ctx: &mut Ctx<'_>) -> Result<()> {
    match name {
        ExperimentName::Fig1b => fig1b(ctx),
        ExperimentName::Fig2a | ExperimentName::Fig2b => fig2(ctx),
        ExperimentName::Fig3a => fig3a(ctx),
        ExperimentName::Fig3b | ExperimentName::Fig4a => diversity_grid(ctx, name),
        ExperimentName::Fig4b => fig4b(ctx),
        ExperimentName::Fig4c => fig4c(ctx),
        ExperimentName::Fig4d | ExperimentName::Fig5 => calibration(ctx, name),
        ExperimentName::Custom => custom(ctx),
    }
}

fn nonempty_grid(ctx: &Ctx<'_>) -> Result<()> {
    if ctx.config.grid.mu.is_empty() || ctx.config.grid.alpha.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    Ok(())
}

fn fig1b(ctx: &mut Ctx<'_>) -> Result<()> {
    nonempty_grid(ctx)?;
    let graph = ctx.graph()?;
    let opts = SweepOptions {
        keep_records: true,
        normalize: false,
    };
    let results = run_sweep(ctx.config, &graph, &grid_cells(ctx.config), opts)?.results;
    let factor = ctx.config.analysis.pdf_factor;

    let mut fits: Vec<(usize, String, String, Option<PowerLawFit>)> = Vec::new();
    for r in &results {
        let pops: Vec<u64> = records(r).iter().map(|p| p.1).collect();
        fits.push((r.index, r.cell.mu_label(), r.cell.alpha_label(), fit_power_law(&pops).ok()));
    }
    ctx.out.write_csv("popularity_pdf.csv", &["cell", "mu", "alpha", "bin_center", "density"], |w| {
        for r in &results {
            let pops: Vec<u64> = records(r).iter().map(|p| p.1).collect();
            for (c, d) in log_binned_pdf(&pops, factor) {
                w.write_record([r.index.to_string(), r.cell.mu_label(), r.cell.alpha_label(), c.to_string(), d.to_string()])?;
            }
        }
        Ok(())
    })?;
    ctx.out.write_csv("popularity_ccdf.csv", &["cell", "mu", "alpha", "popularity", "ccdf"], |w| {
        for r in &results {
            let pops: Vec<u64> = records(r).iter().map(|p| p.1).collect();
            for (v, p) in ccdf(&pops) {
                w.write_record([r.index.to_string(), r.cell.mu_label(), r.cell.alpha_label(), v.to_string(), p.to_string()])?;
            }
        }
        Ok(())
    })?;
    let header = ["cell", "mu", "alpha", "beta", "x_min", "ks_distance", "n_tail"];
    ctx.out.write_csv("powerlaw.csv", &header, |w| {
        for (cell, mu, alpha, fit) in &fits {
            let cols = match fit {
                Some(f) => [f.beta.to_string(), f.x_min.to_string(), f.ks_distance.to_string(), f.n_tail.to_string()],
                None => Default::default(),
            };
            w.write_record([cell.to_string(), mu.clone(), alpha.clone()].into_iter().chain(cols))?;
        }
        Ok(())
    })?;
    #[derive(Serialize)]
    struct FitEntry<'a> {
        cell: usize,
        mu: &'a str,
        alpha: &'a str,
        fit: &'a Option<PowerLawFit>,
    }
    let json: Vec<FitEntry<'_>> = fits
        .iter()
        .map(|(cell, mu, alpha, fit)| FitEntry { cell: *cell, mu, alpha, fit })
        .collect();
    ctx.out.write_json("powerlaw.json", &json)?;
    write_tau(&mut ctx.out, &results)?;
    write_replicas(&mut ctx.out, &results.iter().collect::<Vec<_>>())?;

    for (r, (.., fit)) in results.iter().zip(&fits) {
        let line = tau_line(r);
        ctx.line(line);
        match fit {
            Some(f) => ctx.line(format!("  power law: beta={:.3} x_min={} n_tail={}", f.beta, f.x_min, f.n_tail)),
            None => ctx.line("  power law: fit unavailable"),
        }
    }
    ctx.record_seeds(&results);
    Ok(())
}

fn fig2(ctx: &mut Ctx<'_>) -> Result<()> {
    nonempty_grid(ctx)?;
    let graph = ctx.graph()?;
    let opts = SweepOptions {
        keep_records: true,
        normalize: false,
    };
    let results = run_sweep(ctx.config, &graph, &grid_cells(ctx.config), opts)?.results;
    let bins = ctx.config.analysis.quality_bins;
    let header = ["cell", "mu", "alpha", "bin_lo", "bin_hi", "quality_mid", "mean_popularity", "std_err", "count"];
    ctx.out.write_csv("quality_popularity.csv", &header, |w| {
        for r in &results {
            for b in mean_popularity_by_quality(records(r), bins) {
                w.write_record([
                    r.index.to_string(),
                    r.cell.mu_label(),
                    r.cell.alpha_label(),
                    b.lo.to_string(),
                    b.hi.to_string(),
                    b.mid.to_string(),
                    b.mean.to_string(),
                    b.std_err.to_string(),
                    b.count.to_string(),
                ])?;
            }
        }
        Ok(())
    })?;
    write_tau(&mut ctx.out, &results)?;
    write_replicas(&mut ctx.out, &results.iter().collect::<Vec<_>>())?;
    for r in &results {
        let line = tau_line(r);
        ctx.line(line);
        if let Some(top) = mean_popularity_by_quality(records(r), bins).last() {
            ctx.line(format!("  top quality bin mean popularity {:.2}", top.mean));
        }
    }
    ctx.record_seeds(&results);
    Ok(())
}

fn fig3a(ctx: &mut Ctx<'_>) -> Result<()> {
    nonempty_grid(ctx)?;
    let graph = ctx.graph()?;
    let results = run_sweep(ctx.config, &graph, &grid_cells(ctx.config), SweepOptions::default())?.results;
    write_tau(&mut ctx.out, &results)?;
    write_replicas(&mut ctx.out, &results.iter().collect::<Vec<_>>())?;
    write_histograms(&mut ctx.out, &results)?;
    for r in &results {
        let line = tau_line(r);
        ctx.line(line);
    }
    ctx.record_seeds(&results);
    Ok(())
}

fn diversity_grid(ctx: &mut Ctx<'_>, name: ExperimentName) -> Result<()> {
    nonempty_grid(ctx)?;
    let graph = ctx.graph()?;
    let opts = SweepOptions {
        keep_records: false,
        normalize: true,
    };
    let out = run_sweep(ctx.config, &graph, &grid_cells(ctx.config), opts)?;
    let file = if name == ExperimentName::Fig4a { "tradeoff.csv" } else { "diversity.csv" };
    write_diversity(&mut ctx.out, file, &out.results)?;
    let all: Vec<&SweepResult> = out.results.iter().chain(&out.baselines).collect();
    write_replicas(&mut ctx.out, &all)?;
    for r in &all {
        let line = tau_line(r);
        ctx.line(line);
    }
    ctx.record_seeds(&out.results);
    ctx.record_seeds(&out.baselines);
    Ok(())
}

fn custom(ctx: &mut Ctx<'_>) -> Result<()> {
    nonempty_grid(ctx)?;
    let graph = ctx.graph()?;
    let opts = SweepOptions {
        keep_records: false,
        normalize: true,
    };
    let out = run_sweep(ctx.config, &graph, &grid_cells(ctx.config), opts)?;
    write_tau(&mut ctx.out, &out.results)?;
    write_diversity(&mut ctx.out, "diversity.csv", &out.results)?;
    write_histograms(&mut ctx.out, &out.results)?;
    let all: Vec<&SweepResult> = out.results.iter().chain(&out.baselines).collect();
    write_replicas(&mut ctx.out, &all)?;
    for r in &all {
        let line = tau_line(r);
        ctx.line(line);
    }
    ctx.record_seeds(&out.results);
    ctx.record_seeds(&out.baselines);
    Ok(())
}

fn fig4b(ctx: &mut Ctx<'_>) -> Result<()> {
    let (mu, _) = load_distributions(ctx.config)?;
    let mut grid = SearchGrid::default_for(FitTarget::MuDist);
    grid.seed = derive_seed(ctx.config.seed, &[0]);
    let report = scrolling::fit(&mu.pairs(), FitTarget::MuDist, &grid)?;
    let mut rng = from_seed(derive_seed(ctx.config.seed, &[1]));
    let users = (mu.sample_count as usize).max(1000);
    let model = scrolling::simulate_user_mu(&report.params, grid.sessions_per_user, users, &mut rng);
    let bins = grid.mu_bins;
    let emp = scrolling::mu_histogram(mu.pairs().into_iter(), bins);
    let sim = scrolling::mu_histogram(model.iter().map(|&m| (m, 1.0)), bins);
    ctx.out.write_csv("mu_histogram.csv", &["bin_lo", "bin_hi", "empirical", "model"], |w| {
        for i in 0..=bins {
            let (lo, hi) = if i == bins {
                (1.0, 1.0)
            } else {
                (i as f64 / bins as f64, (i + 1) as f64 / bins as f64)
            };
            w.write_record([lo.to_string(), hi.to_string(), emp[i].to_string(), sim[i].to_string()])?;
        }
        Ok(())
    })?;
    ctx.out.write_json("fit_mu.json", &report)?;
    ctx.line(format!("empirical mean mu {:.4} over {} users", mu.mean(), mu.sample_count));
    ctx.line(format!(
        "fit: rho={:.4} q_mean={:.4} sigma={:.4} chi2={:.5}",
        report.params.rho, report.params.q_mean, report.params.sigma, report.discrepancy
    ));
    Ok(())
}

fn fig4c(ctx: &mut Ctx<'_>) -> Result<()> {
    let datasets: Vec<(String, EmpiricalDist)> = match &ctx.config.calibration.alpha_csv {
        Some(_) => vec![("configured".into(), load_distributions(ctx.config)?.1)],
        None => vec![
            ("sigma002".into(), ingest_alpha(standin::ALPHA_NARROW_CSV.as_bytes())?.0),
            ("sigma009".into(), ingest_alpha(standin::ALPHA_WIDE_CSV.as_bytes())?.0),
        ],
    };
    #[derive(Serialize)]
    struct Fit {
        dataset: String,
        report: FitReport,
    }
    let mut fits = Vec::new();
    for (name, d) in &datasets {
        let report = scrolling::fit(&d.pairs(), FitTarget::AlphaDist, &SearchGrid::default_for(FitTarget::AlphaDist))?;
        ctx.line(format!(
            "{name}: mean alpha {:.2}, fit q_mean={:.4} sigma={:.4} ks={:.5}",
            d.mean(),
            report.params.q_mean,
            report.params.sigma,
            report.discrepancy
        ));
        fits.push(Fit {
            dataset: name.clone(),
            report,
        });
    }
    ctx.out.write_csv("alpha_pmf.csv", &["dataset", "alpha", "empirical", "model"], |w| {
        for ((name, d), fit) in datasets.iter().zip(&fits) {
            let total = d.total_weight();
            for (a, p) in scrolling::pmf_table(&fit.report.params, d.max() as u64) {
                let emp = d
                    .support
                    .binary_search_by(|v| v.total_cmp(&(a as f64)))
                    .map(|i| d.weights[i] / total)
                    .unwrap_or(0.0);
                w.write_record([name.clone(), a.to_string(), emp.to_string(), p.to_string()])?;
            }
        }
        Ok(())
    })?;
    ctx.out.write_json("fit_alpha.json", &fits)?;

    let sc = &ctx.config.scrolling;
    let graph = ctx.graph()?;
    let rows = scrolling_dynamics_experiment(sc.rho, sc.q_mean, &sc.sigma, sc.rho, ctx.config, &graph)?;
    ctx.out.write_csv("scrolling_tau.csv", &["sigma", "replicas", "tau_mean", "tau_std", "tau_pooled"], |w| {
        for r in &rows {
            w.write_record([
                r.sigma.to_string(),
                r.replicas.to_string(),
                opt(r.tau_mean),
                opt(r.tau_std),
                opt(r.tau_pooled),
            ])?;
        }
        Ok(())
    })?;
    for r in &rows {
        ctx.line(format!("scrolling sigma={} tau_mean={}", r.sigma, opt(r.tau_mean)));
    }
    Ok(())
}

fn calibration(ctx: &mut Ctx<'_>, name: ExperimentName) -> Result<()> {
    let (mu, alpha) = load_distributions(ctx.config)?;
    let graph = ctx.graph()?;
    let (report, results) = calibration_report(&mu, &alpha, ctx.config, &graph)?;
    write_calibration(&mut ctx.out, &report)?;
    write_replicas(&mut ctx.out, &results.iter().collect::<Vec<_>>())?;
    if name == ExperimentName::Fig5 {
        write_groups(ctx, &results)?;
    }
    for r in &results {
        let line = tau_line(r);
        ctx.line(line);
    }
    if let Some(x) = report.naive_ratio {
        ctx.line(format!("tau_naive / tau_reference = {x:.4}"));
    }
    ctx.record_seeds(&results);
    Ok(())
}

fn write_calibration(out: &mut OutputDir, report: &CalibrationReport) -> Result<()> {
    let header = ["condition", "mu", "alpha", "replicas", "tau_mean", "tau_std", "tau_pooled"];
    out.write_csv("calibration.csv", &header, |w| {
        for c in [&report.naive, &report.distributional, &report.reference] {
            w.write_record([
                c.condition.clone(),
                c.mu.clone(),
                c.alpha.clone(),
                c.taus.len().to_string(),
                opt(c.tau_mean),
                opt(c.tau_std),
                opt(c.tau_pooled),
            ])?;
        }
        Ok(())
    })?;
    out.write_json("calibration.json", report)
}

fn write_groups(ctx: &mut Ctx<'_>, results: &[SweepResult]) -> Result<()> {
    let threshold = ctx.config.analysis.group_threshold;
    let groups = results
        .iter()
        .map(|r| Ok((r.cell.label.clone(), popularity_by_quality_group(records(r), threshold)?)))
        .collect::<Result<Vec<_>>>()?;
    ctx.out.write_csv("quality_groups.csv", &["condition", "group", "popularity", "ccdf"], |w| {
        for (cond, g) in &groups {
            for (group, rows) in [("high", &g.high_ccdf), ("low", &g.low_ccdf)] {
                for (v, p) in rows.iter() {
                    w.write_record([cond.clone(), group.to_string(), v.to_string(), p.to_string()])?;
                }
            }
        }
        Ok(())
    })?;
    let header = [
        "condition", "threshold", "high_n", "low_n", "high_max", "low_max", "ks_distance", "max_ratio",
    ];
    ctx.out.write_csv("group_stats.csv", &header, |w| {
        for (cond, g) in &groups {
            let max = |v: &[u64]| v.iter().max().map(|m| m.to_string()).unwrap_or_default();
            w.write_record([
                cond.clone(),
                threshold.to_string(),
                g.high.len().to_string(),
                g.low.len().to_string(),
                max(&g.high),
                max(&g.low),
                opt(g.ks_distance),
                opt(g.max_ratio),
            ])?;
        }
        Ok(())
    })?;
    for (cond, g) in &groups {
        ctx.line(format!(
            "{cond}: group KS={} max ratio={}{}{}",
            opt(g.ks_distance),
            opt(g.max_ratio),
            if g.high_empty { " (high group empty)" } else { "" },
            if g.low_empty { " (low group empty)" } else { "" }
        ));
    }
    Ok(())
}
