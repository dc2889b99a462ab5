//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::prelude::*;
use rand_distr::Zeta;

use memesim::diffusion::select_weighted;
use memesim::harness::{
    calibration_report, load_distributions, run_sweep, CalibrationReport, Cell, ExperimentConfig, Scale,
    SweepOptions, SweepResult,
};
use memesim::metrics::{fit_power_law, popularity_by_quality_group, tau_counts, TauCounts};
use memesim::netgen::{generate, Graph};
use memesim::rng;
use memesim::scrolling::{session_pmf, ScrollParams};

type Check = std::result::Result<String, String>;

const SEED: u64 = 42;

fn desk() -> ExperimentConfig {
    ExperimentConfig {
        seed: SEED,
        ..ExperimentConfig::defaults(Scale::Desk)
    }
}

fn graph() -> &'static Graph {
    static G: OnceLock<Graph> = OnceLock::new();
    G.get_or_init(|| generate(&desk().net_spec()).unwrap())
}

fn sweep(cells: &[Cell], opts: SweepOptions) -> Result<Vec<SweepResult>, String> {
    run_sweep(&desk(), graph(), cells, opts)
        .map(|o| o.results)
        .map_err(|e| e.to_string())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn tau_means(results: &[SweepResult]) -> Result<Vec<f64>, String> {
    results
        .iter()
        .map(|r| r.tau_mean.ok_or_else(|| format!("tau undefined for {}", r.cell.label)))
        .collect()
}

fn popularity_exponent() -> Check {
    let start = Instant::now();
    let opts = SweepOptions {
        keep_records: true,
        normalize: false,
    };
    let r = sweep(&[Cell::fixed(0.1, 10)], opts)?;
    let pops: Vec<u64> = r[0].records.as_ref().unwrap().iter().map(|p| p.1).collect();
    let fit = fit_power_law(&pops).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let msg = format!(
        "beta={:.3} x_min={} n_tail={} over {} records in {secs:.1}s",
        fit.beta,
        fit.x_min,
        fit.n_tail,
        pops.len()
    );
    if (1.8..=2.1).contains(&fit.beta) && secs < 300.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn tau_monotonicity() -> Check {
    let mus = [0.1, 0.3, 0.5, 0.75, 0.9];
    let alphas = [2, 8, 32];
    let mut cells: Vec<Cell> = mus.iter().map(|&m| Cell::fixed(m, 10)).collect();
    cells.extend(alphas.iter().map(|&a| Cell::fixed(0.1, a)));
    let taus = tau_means(&sweep(&cells, SweepOptions::default())?)?;
    let (by_mu, by_alpha) = taus.split_at(mus.len());
    let dec = by_mu.windows(2).all(|w| w[0] > w[1]);
    let inc = by_alpha.windows(2).all(|w| w[0] < w[1]);
    let msg = format!(
        "alpha=10 over mu {mus:?}: [{}]; mu=0.1 over alpha {alphas:?}: [{}]",
        fmt_list(by_mu),
        fmt_list(by_alpha)
    );
    if dec && inc {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn diversity() -> Check {
    let mus = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0];
    let cells: Vec<Cell> = mus.iter().map(|&m| Cell::fixed(m, 10)).collect();
    let opts = SweepOptions {
        keep_records: false,
        normalize: true,
    };
    let h: Vec<f64> = sweep(&cells, opts)?
        .iter()
        .map(|r| r.normalized_entropy.unwrap_or(f64::NAN))
        .collect();
    let msg = format!("H/H(mu=1) over mu {mus:?}: [{}]", fmt_list(&h));
    let ends = h[0] == 0.0 && h[mus.len() - 1] == 1.0;
    let nondecreasing = h[1..].windows(2).all(|w| w[0] <= w[1]);
    if ends && nondecreasing {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn calibration() -> &'static Result<(CalibrationReport, Vec<SweepResult>), String> {
    static R: OnceLock<Result<(CalibrationReport, Vec<SweepResult>), String>> = OnceLock::new();
    R.get_or_init(|| {
        let c = desk();
        let (mu, alpha) = load_distributions(&c).map_err(|e| e.to_string())?;
        calibration_report(&mu, &alpha, &c, graph()).map_err(|e| e.to_string())
    })
}

fn calibration_ordering() -> Check {
    let (report, _) = calibration().as_ref().map_err(Clone::clone)?;
    let naive = report.naive.tau_mean.ok_or("naive tau undefined")?;
    let dist = report.distributional.tau_mean.ok_or("distributional tau undefined")?;
    let reference = report.reference.tau_mean.ok_or("reference tau undefined")?;
    let ratio = naive / reference;
    let msg = format!(
        "naive(mu={}, alpha={}) {naive:.4}, distributional {dist:.4}, reference {reference:.4}, ratio {ratio:.3}",
        report.naive.mu, report.naive.alpha
    );
    if (0.55..=0.85).contains(&ratio) && dist < naive && (0.05..=0.30).contains(&dist) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scrolling_limits() -> Check {
    let geo = ScrollParams::new(0.0, 0.1, 0.0).unwrap();
    let mut max_err: f64 = 0.0;
    let mut max_slope_err: f64 = 0.0;
    for a in 1..=1000u64 {
        let p = session_pmf(&geo, a).unwrap();
        max_err = max_err.max((p - 0.1 * 0.9f64.powi(a as i32 - 1)).abs());
        let next = session_pmf(&geo, a + 1).unwrap();
        max_slope_err = max_slope_err.max((next.ln() - p.ln() - 0.9f64.ln()).abs());
    }
    let heavy = ScrollParams::new(0.0, 0.1, 0.1).unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (100..=1000u64)
        .map(|a| ((a as f64).ln(), session_pmf(&heavy, a).unwrap().ln()))
        .unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let msg = format!("geometric max error {max_err:.2e}, log-slope error {max_slope_err:.2e}, tail slope {slope:.3}");
    if max_err <= 1e-12 && max_slope_err <= 1e-6 && (-2.3..=-1.7).contains(&slope) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Pair-by-pair enumeration, written independently of the library.
fn brute_force(data: &[(f64, f64)]) -> TauCounts {
    let n = data.len() as u64;
    let (mut tx, mut ty, mut txy, mut s) = (0, 0, 0, 0i64);
    for (i, a) in data.iter().enumerate() {
        for b in &data[i + 1..] {
            let sx = (a.0 - b.0).signum() as i64 * (a.0 != b.0) as i64;
            let sy = (a.1 - b.1).signum() as i64 * (a.1 != b.1) as i64;
            tx += (sx == 0) as u64;
            ty += (sy == 0) as u64;
            txy += (sx == 0 && sy == 0) as u64;
            s += sx * sy;
        }
    }
    TauCounts {
        pairs: n * n.saturating_sub(1) / 2,
        tied_x: tx,
        tied_y: ty,
        tied_xy: txy,
        score: s,
    }
}

fn oracles() -> Check {
    let mut r = rng::from_seed(rng::derive_seed(SEED, &[6]));
    for case in 0..1000 {
        let n = r.random_range(2..300);
        let kx = r.random_range(1..12);
        let ky = r.random_range(1..40);
        let data: Vec<(f64, f64)> = (0..n)
            .map(|_| (r.random_range(0..kx) as f64 / 4.0, r.random_range(0..ky) as f64))
            .collect();
        let (fast, slow) = (tau_counts(&data), brute_force(&data));
        if fast != slow {
            return Err(format!("tau counts differ on case {case}: {fast:?} vs {slow:?}"));
        }
    }

    let mut fits = Vec::new();
    for beta in [1.5, 2.0, 2.5, 3.0] {
        let z: Zeta<f64> = Zeta::new(beta).unwrap();
        let samples: Vec<u64> = (0..100_000).map(|_| z.sample(&mut r).min(1e18) as u64).collect();
        let fit = fit_power_law(&samples).map_err(|e| e.to_string())?;
        if (fit.beta - beta).abs() > 0.1 {
            return Err(format!("power law {beta} recovered as {:.3}", fit.beta));
        }
        fits.push(fit.beta);
    }

    let feed = [(0u32, 0.7), (1, 0.2), (0, 0.7), (2, 0.4)];
    let total: f64 = feed.iter().map(|c| c.1).sum();
    let draws = 100_000;
    let mut hits = [0u64; 3];
    for _ in 0..draws {
        hits[select_weighted(feed.iter().copied(), &mut r) as usize] += 1;
    }
    let mut worst: f64 = 0.0;
    for (id, &h) in hits.iter().enumerate() {
        let p: f64 = feed.iter().filter(|c| c.0 == id as u32).map(|c| c.1).sum::<f64>() / total;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        worst = worst.max((h as f64 / draws as f64 - p).abs() / se);
    }
    let msg = format!(
        "1000 tied datasets match; recovered exponents [{}]; worst selection deviation {worst:.2} SE",
        fmt_list(&fits)
    );
    if worst <= 3.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn quality_groups() -> Check {
    let (_, results) = calibration().as_ref().map_err(Clone::clone)?;
    let threshold = desk().analysis.group_threshold;
    let group = |label: &str| {
        let r = results.iter().find(|r| r.cell.label == label).unwrap();
        popularity_by_quality_group(r.records.as_ref().unwrap(), threshold).map_err(|e| e.to_string())
    };
    let dist = group("distributional")?;
    let reference = group("reference")?;
    let (dks, dratio) = (dist.ks_distance.ok_or("empty group")?, dist.max_ratio.ok_or("empty group")?);
    let rks = reference.ks_distance.ok_or("empty group")?;
    let msg = format!("distributional KS {dks:.4}, max ratio {dratio:.2}; reference KS {rks:.4}");
    if dks < 0.15 && dratio < 10.0 && rks >= 2.0 * dks {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for jobs in ["1", "8"] {
        let dir = tmp.path().join(format!("jobs{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_memesim"))
            .args(["experiment", "fig3a", "--seed", "42", "--jobs", jobs, "--out"])
            .arg(&dir)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("fig3a with --jobs {jobs} exited with {status}"));
        }
        outputs.push(csv_files(&dir));
    }
    let names: Vec<&String> = outputs[0].keys().collect();
    let msg = format!("{} CSV files compared ({})", names.len(), names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "));
    if !names.is_empty() && outputs[0] == outputs[1] {
        Ok(msg)
    } else {
        Err(format!("outputs differ: {msg}"))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("popularity exponent", popularity_exponent),
        ("discriminative-power monotonicity", tau_monotonicity),
        ("diversity", diversity),
        ("calibration ordering", calibration_ordering),
        ("scrolling limits", scrolling_limits),
        ("oracle equivalences", oracles),
        ("quality-group virality", quality_groups),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
