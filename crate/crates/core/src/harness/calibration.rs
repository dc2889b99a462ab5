use std::sync::Arc;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::sweep::{run_sweep, Cell, SweepOptions, SweepResult};
use crate::calib::{naive_params, standin, ingest_alpha, ingest_mu, EmpiricalDist};
use crate::diffusion::{AlphaMode, MuMode};
use crate::netgen::Graph;
use crate::scrolling::ScrollParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub mu: String,
    pub alpha: String,
    pub taus: Vec<Option<f64>>,
    pub tau_mean: Option<f64>,
    pub tau_std: Option<f64>,
    pub tau_pooled: Option<f64>,
}

impl ConditionSummary {
    fn from_result(condition: &str, r: &SweepResult) -> Self {
        ConditionSummary {
            condition: condition.to_string(),
            mu: r.cell.mu_label(),
            alpha: r.cell.alpha_label(),
            taus: r.replicas.iter().map(|s| s.tau).collect(),
            tau_mean: r.tau_mean,
            tau_std: r.tau_std,
            tau_pooled: r.tau_pooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub naive: ConditionSummary,
    pub distributional: ConditionSummary,
    pub reference: ConditionSummary,
    /// tau_naive / tau_reference over replica means.
    pub naive_ratio: Option<f64>,
}

/// Load and attention distributions named by the config, falling back to
/// the shipped stand-ins.
pub fn load_distributions(config: &ExperimentConfig) -> Result<(EmpiricalDist, EmpiricalDist)> {
    let mu = match &config.calibration.mu_csv {
        Some(p) => ingest_mu(std::fs::File::open(p).map_err(|e| Error::io(p, e))?)?.0,
        None => ingest_mu(standin::MU_CSV.as_bytes())?.0,
    };
    let alpha = match &config.calibration.alpha_csv {
        Some(p) => ingest_alpha(std::fs::File::open(p).map_err(|e| Error::io(p, e))?)?.0,
        None => ingest_alpha(standin::ALPHA_WIDE_CSV.as_bytes())?.0,
    };
    Ok((mu, alpha))
}

/// Runs the naive, distributional and reference conditions (cells 0, 1
/// and 2, records kept) and summarises their tau.
pub fn calibration_report(
    mu_dist: &EmpiricalDist,
    alpha_dist: &EmpiricalDist,
    config: &ExperimentConfig,
    graph: &Graph,
) -> Result<(CalibrationReport, Vec<SweepResult>)> {
    let (mbar, abar) = naive_params(mu_dist, alpha_dist);
    let cal = &config.calibration;
    let cells = vec![
        Cell {
            label: "naive".into(),
            ..Cell::fixed(mbar, abar)
        },
        Cell {
            label: "distributional".into(),
            mu_mode: MuMode::Empirical(Arc::new(mu_dist.clone())),
            alpha_mode: AlphaMode::Empirical {
                dist: Arc::new(alpha_dist.clone()),
                per_activation: cal.per_activation,
            },
        },
        Cell {
            label: "reference".into(),
            ..Cell::fixed(cal.reference_mu, cal.reference_alpha)
        },
    ];
    let opts = SweepOptions {
        keep_records: true,
        normalize: false,
    };
    let results = run_sweep(config, graph, &cells, opts)?.results;
    let naive = ConditionSummary::from_result("naive", &results[0]);
    let reference = ConditionSummary::from_result("reference", &results[2]);
    let naive_ratio = match (naive.tau_mean, reference.tau_mean) {
        (Some(a), Some(b)) if b != 0.0 => Some(a / b),
        _ => None,
    };
    let report = CalibrationReport {
        distributional: ConditionSummary::from_result("distributional", &results[1]),
        naive,
        reference,
        naive_ratio,
    };
    Ok((report, results))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScrollTauRow {
    pub sigma: f64,
    pub tau_mean: Option<f64>,
    pub tau_std: Option<f64>,
    pub tau_pooled: Option<f64>,
    pub replicas: usize,
}

/// Tau as a function of the stop-probability spread when attention
/// follows the scrolling session model, at fixed `q_mean` and load.
pub fn scrolling_dynamics_experiment(
    rho: f64,
    q_mean: f64,
    sigmas: &[f64],
    mu: f64,
    config: &ExperimentConfig,
    graph: &Graph,
) -> Result<Vec<ScrollTauRow>> {
    if sigmas.is_empty() {
        return Err(Error::Config("sigma grid is empty".into()));
    }
    let cells: Vec<Cell> = sigmas
        .iter()
        .map(|&s| {
            let p = ScrollParams::new(rho, q_mean, s)?;
            Ok(Cell {
                label: format!("scrolling:sigma={s}"),
                mu_mode: MuMode::Fixed(mu),
                alpha_mode: AlphaMode::Scrolling(p),
            })
        })
        .collect::<Result<_>>()?;
    let out = run_sweep(config, graph, &cells, SweepOptions::default())?;
    Ok(out
        .results
        .iter()
        .zip(sigmas)
        .map(|(r, &sigma)| ScrollTauRow {
            sigma,
            tau_mean: r.tau_mean,
            tau_std: r.tau_std,
            tau_pooled: r.tau_pooled,
            replicas: r.replicas.len(),
        })
        .collect())
}
