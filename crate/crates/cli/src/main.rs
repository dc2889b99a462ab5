use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use memesim::calib::{ingest_alpha, ingest_mu};
use memesim::diffusion::{self, write_diversity_csv, write_memes_csv, write_node_states_csv, World};
use memesim::harness::{run_experiment, ExperimentConfig, ExperimentName, Scale};
use memesim::metrics;
use memesim::netgen::{clustering_coefficient, generate, Graph, NetSpec};
use memesim::scrolling::{self, FitTarget, SearchGrid};
use memesim::{Error, Result};

/// Meme diffusion under finite attention and information load.
///
/// Settings are resolved in this order, later sources winning: built-in
/// experiment preset, `--full-scale`, the `--config` TOML file, then
/// explicit command-line flags.
#[derive(Parser)]
#[command(name = "memesim", version)]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with experiment settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = default_jobs())]
    jobs: usize,
    /// Large preset: 20 replicas of 100k tracked memes.
    #[arg(long, global = true)]
    full_scale: bool,
    #[command(subcommand)]
    command: Command,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect a network.
    Net {
        #[command(subcommand)]
        action: NetAction,
    },
    /// Run one model configuration and export its records.
    Run(RunArgs),
    /// Run a named experiment preset.
    Experiment {
        #[arg(value_parser = parse_experiment)]
        name: ExperimentName,
        #[command(flatten)]
        scale: ScaleArgs,
    },
    /// Sweep a grid of fixed load and attention values.
    Sweep {
        /// Comma-separated load values.
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<f64>,
        /// Comma-separated attention values.
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<u32>,
        #[command(flatten)]
        scale: ScaleArgs,
    },
    /// Compare naive, distributional and reference calibrations.
    Calibrate {
        /// `user_id,n_t,n_r` file (default: shipped stand-in).
        #[arg(long)]
        mu_csv: Option<PathBuf>,
        /// `session_id,stops` file (default: shipped stand-in).
        #[arg(long)]
        alpha_csv: Option<PathBuf>,
        /// Redraw attention on every activation.
        #[arg(long)]
        per_activation: bool,
        #[command(flatten)]
        scale: ScaleArgs,
    },
    /// Fit the scrolling session model to an empirical distribution.
    Scrollfit {
        #[arg(long, value_enum)]
        target: FitKind,
        /// Input CSV (`user_id,n_t,n_r` or `session_id,stops`).
        #[arg(long)]
        input: PathBuf,
        /// Also write the fitted pmf up to this attention value.
        #[arg(long)]
        pmf_max: Option<u64>,
    },
    /// Compute a metric from a records CSV.
    Metrics {
        #[arg(value_enum)]
        metric: MetricKind,
        /// CSV with `quality` and `popularity` columns, or `item,count`.
        #[arg(long)]
        input: PathBuf,
        /// Quality bins for `quality` and `mi`.
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Threshold for `groups`.
        #[arg(long, default_value_t = 0.34)]
        threshold: f64,
    },
}

#[derive(Subcommand)]
enum NetAction {
    /// Write an edge list.
    Generate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        /// Triad-closure probability; switches to the Holme-Kim generator when > 0.
        #[arg(long, default_value_t = 0.0)]
        triad_prob: f64,
        /// Edge-list file (stdout when absent).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print statistics of an edge-list file.
    Inspect { file: PathBuf },
}

#[derive(Args, Clone, Default)]
struct ScaleArgs {
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    tracked_memes: Option<usize>,
    /// Network size.
    #[arg(long)]
    nodes: Option<usize>,
    /// Edges per new node.
    #[arg(long)]
    edges_per_node: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
    #[arg(long, default_value_t = 10)]
    alpha: u32,
    /// Also export the last shared meme of every node.
    #[arg(long)]
    snapshot: bool,
    #[command(flatten)]
    scale: ScaleArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitKind {
    Mu,
    Alpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Tau,
    Powerlaw,
    Pdf,
    Ccdf,
    Quality,
    Groups,
    Mi,
}

fn parse_experiment(s: &str) -> std::result::Result<ExperimentName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Net { action } => net(action, cli.seed.unwrap_or(1)),
        Command::Run(args) => run(&cli, args),
        Command::Experiment { name, scale } => {
            let config = resolve(&cli, *name, scale, |_| {})?;
            experiment(&cli, *name, &config)
        }
        Command::Sweep { mu, alpha, scale } => {
            let config = resolve(&cli, ExperimentName::Custom, scale, |c| {
                c.grid.mu = mu.clone();
                c.grid.alpha = alpha.clone();
            })?;
            experiment(&cli, ExperimentName::Custom, &config)
        }
        Command::Calibrate {
            mu_csv,
            alpha_csv,
            per_activation,
            scale,
        } => {
            let config = resolve(&cli, ExperimentName::Fig4d, scale, |c| {
                if mu_csv.is_some() {
                    c.calibration.mu_csv = mu_csv.clone();
                }
                if alpha_csv.is_some() {
                    c.calibration.alpha_csv = alpha_csv.clone();
                }
                c.calibration.per_activation |= per_activation;
            })?;
            experiment(&cli, ExperimentName::Fig4d, &config)
        }
        Command::Scrollfit { target, input, pmf_max } => scrollfit(&cli, *target, input, *pmf_max),
        Command::Metrics {
            metric,
            input,
            bins,
            threshold,
        } => metrics_cmd(*metric, input, *bins, *threshold),
    }
}

fn resolve(
    cli: &Cli,
    name: ExperimentName,
    scale: &ScaleArgs,
    flags: impl FnOnce(&mut ExperimentConfig),
) -> Result<ExperimentConfig> {
    let preset = if cli.full_scale { Scale::Full } else { Scale::Desk };
    let mut c = ExperimentConfig::preset(name, preset);
    if let Some(path) = &cli.config {
        c = c.merge_file(path)?;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(r) = scale.replicas {
        c.run.replicas = r;
    }
    if let Some(t) = scale.tracked_memes {
        c.run.tracked_memes = t;
    }
    if let Some(n) = scale.nodes {
        c.network.n = n;
    }
    if let Some(m) = scale.edges_per_node {
        c.network.m = m;
    }
    flags(&mut c);
    c.validate()?;
    Ok(c)
}

fn out_dir(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("results").join(default))
}

fn experiment(cli: &Cli, name: ExperimentName, config: &ExperimentConfig) -> Result<()> {
    let dir = out_dir(cli, name.as_str());
    let manifest = run_experiment(name, config, &dir, cli.jobs)?;
    let summary = std::fs::read_to_string(dir.join("summary.txt")).map_err(|e| Error::io(dir.join("summary.txt"), e))?;
    print!("{summary}");
    println!("{} files written to {}", manifest.files.len() + 1, dir.display());
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn net(action: &NetAction, seed: u64) -> Result<()> {
    match action {
        NetAction::Generate {
            n,
            m,
            triad_prob,
            output,
        } => {
            let spec = if *triad_prob > 0.0 {
                NetSpec::holme_kim(*n, *m, *triad_prob, seed)
            } else {
                NetSpec::barabasi_albert(*n, *m, seed)
            };
            let g = generate(&spec)?;
            match output {
                Some(p) => g.write_edge_list(create(p)?).map_err(|e| Error::io(p, e)),
                None => g.write_edge_list(std::io::stdout().lock()).map_err(|e| Error::io("<stdout>", e)),
            }
        }
        NetAction::Inspect { file } => {
            let g = Graph::read_edge_list(File::open(file).map_err(|e| Error::io(file, e))?)?;
            let degrees: Vec<u64> = (0..g.node_count() as u32).map(|v| g.degree(v) as u64).collect();
            println!("nodes {}", g.node_count());
            println!("edges {}", g.edge_count());
            println!("mean degree {:.4}", g.mean_degree());
            println!("min degree {}", degrees.iter().min().copied().unwrap_or(0));
            println!("max degree {}", degrees.iter().max().copied().unwrap_or(0));
            println!("connected {}", g.is_connected());
            println!("clustering {:.6}", clustering_coefficient(&g));
            match metrics::fit_power_law(&degrees) {
                Ok(f) => println!("degree exponent {:.4} (x_min {}, n_tail {})", f.beta, f.x_min, f.n_tail),
                Err(e) => println!("degree exponent unavailable: {e}"),
            }
            Ok(())
        }
    }
}

fn run(cli: &Cli, args: &RunArgs) -> Result<()> {
    let config = resolve(cli, ExperimentName::Custom, &args.scale, |c| {
        c.grid.mu = vec![args.mu];
        c.grid.alpha = vec![args.alpha];
    })?;
    let model = config.model_config(diffusion::MuMode::Fixed(args.mu), diffusion::AlphaMode::Fixed(args.alpha));
    model.validate()?;
    let graph = generate(&model.net)?;
    let pool = rayon_pool(cli.jobs)?;
    let runs = pool.install(|| diffusion::run_replicas(&model, &graph))?;

    let dir = out_dir(cli, "run");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_memes_csv(create(&dir.join("memes.csv"))?, runs.iter().enumerate())?;
    write_diversity_csv(create(&dir.join("diversity.csv"))?, runs.iter().enumerate())?;
    if args.snapshot {
        let mut world = World::new(&model, &graph)?;
        for _ in 0..(graph.node_count() as u64 * 100) {
            world.step();
        }
        write_node_states_csv(create(&dir.join("node_states.csv"))?, &world.snapshot_node_states())?;
    }
    for (i, r) in runs.iter().enumerate() {
        let tau = metrics::discriminative_power(&r.quality_popularity())
            .map(|t| format!("{t:.4}"))
            .unwrap_or_else(|e| e.to_string());
        println!(
            "replica {i}: tau {tau} mean entropy {:.4} steady at step {} ({} records)",
            r.mean_entropy(),
            r.steady_step,
            r.records.len()
        );
    }
    println!("written to {}", dir.display());
    Ok(())
}

fn rayon_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

fn scrollfit(cli: &Cli, target: FitKind, input: &Path, pmf_max: Option<u64>) -> Result<()> {
    let file = File::open(input).map_err(|e| Error::io(input, e))?;
    let (dist, report_in, fit_target) = match target {
        FitKind::Mu => {
            let (d, r) = ingest_mu(file)?;
            (d, r, FitTarget::MuDist)
        }
        FitKind::Alpha => {
            let (d, r) = ingest_alpha(file)?;
            (d, r, FitTarget::AlphaDist)
        }
    };
    let mut grid = SearchGrid::default_for(fit_target);
    if let Some(s) = cli.seed {
        grid.seed = s;
    }
    let report = scrolling::fit(&dist.pairs(), fit_target, &grid)?;
    eprintln!(
        "{} rows, {} accepted, {} skipped",
        report_in.rows, report_in.accepted, report_in.skipped
    );
    let json = serde_json::to_string_pretty(&report)?;
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join("fit.json");
            std::fs::write(&path, format!("{json}\n")).map_err(|e| Error::io(&path, e))?;
            if let Some(max) = pmf_max {
                let path = dir.join("pmf.csv");
                let mut f = create(&path)?;
                writeln!(f, "alpha,probability").map_err(|e| Error::io(&path, e))?;
                for (a, p) in scrolling::pmf_table(&report.params, max) {
                    writeln!(f, "{a},{p}").map_err(|e| Error::io(&path, e))?;
                }
            }
            println!("fit written to {}", dir.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

/// `(quality, popularity)` rows from a records CSV, or `(NaN, count)` rows
/// from an `item,count` file.
fn read_records(path: &Path) -> Result<Vec<(f64, u64)>> {
    let mut rdr = csv::Reader::from_reader(File::open(path).map_err(|e| Error::io(path, e))?);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (q, p) = match (col("quality"), col("popularity"), col("count")) {
        (q, Some(p), _) => (q, p),
        (q, None, Some(p)) => (q, p),
        _ => return Err(Error::Input(format!("{}: no `popularity` or `count` column", path.display()))),
    };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = || Error::Input(format!("{}: row {} is malformed", path.display(), i + 2));
        let pop: u64 = rec.get(p).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let quality = match q {
            Some(q) => rec.get(q).and_then(|s| s.parse().ok()).ok_or_else(bad)?,
            None => f64::NAN,
        };
        rows.push((quality, pop));
    }
    Ok(rows)
}

fn need_quality(rows: &[(f64, u64)]) -> Result<()> {
    if rows.iter().any(|r| r.0.is_nan()) {
        return Err(Error::Input("this metric needs a `quality` column".into()));
    }
    Ok(())
}

fn metrics_cmd(metric: MetricKind, input: &Path, bins: usize, threshold: f64) -> Result<()> {
    let rows = read_records(input)?;
    let pops: Vec<u64> = rows.iter().map(|r| r.1).collect();
    let mut out = std::io::stdout().lock();
    let io = |e| Error::io("<stdout>", e);
    match metric {
        MetricKind::Tau => {
            need_quality(&rows)?;
            writeln!(out, "tau_b,n\n{},{}", metrics::discriminative_power(&rows)?, rows.len()).map_err(io)?;
        }
        MetricKind::Powerlaw => {
            let fit = metrics::fit_power_law(&pops)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&fit)?).map_err(io)?;
        }
        MetricKind::Pdf => {
            writeln!(out, "bin_center,density").map_err(io)?;
            for (c, d) in metrics::log_binned_pdf(&pops, 2.0) {
                writeln!(out, "{c},{d}").map_err(io)?;
            }
        }
        MetricKind::Ccdf => {
            writeln!(out, "popularity,ccdf").map_err(io)?;
            for (v, p) in metrics::ccdf(&pops) {
                writeln!(out, "{v},{p}").map_err(io)?;
            }
        }
        MetricKind::Quality => {
            need_quality(&rows)?;
            writeln!(out, "bin_lo,bin_hi,quality_mid,mean_popularity,std_err,count").map_err(io)?;
            for b in metrics::mean_popularity_by_quality(&rows, bins) {
                writeln!(out, "{},{},{},{},{},{}", b.lo, b.hi, b.mid, b.mean, b.std_err, b.count).map_err(io)?;
            }
        }
        MetricKind::Groups => {
            need_quality(&rows)?;
            let g = metrics::popularity_by_quality_group(&rows, threshold)?;
            writeln!(out, "group,popularity,ccdf").map_err(io)?;
            for (name, rows) in [("high", &g.high_ccdf), ("low", &g.low_ccdf)] {
                for (v, p) in rows.iter() {
                    writeln!(out, "{name},{v},{p}").map_err(io)?;
                }
            }
            eprintln!(
                "high {} low {} ks {} max ratio {}",
                g.high.len(),
                g.low.len(),
                memesim::harness::opt(g.ks_distance),
                memesim::harness::opt(g.max_ratio)
            );
        }
        MetricKind::Mi => {
            need_quality(&rows)?;
            let mi = metrics::mutual_information(&rows, bins, 2.0);
            writeln!(out, "mutual_information\n{mi}").map_err(io)?;
        }
    }
    Ok(())
}
