//! Scrolling-session model of attention.
//!
//! A session is either a single new post (probability `rho`) or a run of
//! reshares: the user keeps scrolling and resharing, stopping after each
//! reshare with probability `q`, where `q` is drawn once per session from
//! `U[q_mean - sigma, q_mean + sigma]`. Run lengths give the attention
//! distribution; the post/reshare mix across many sessions gives each
//! user's information load `mu = n_t / (n_t + n_r)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrollParams {
    pub rho: f64,
    pub q_mean: f64,
    pub sigma: f64,
}

impl ScrollParams {
    pub fn new(rho: f64, q_mean: f64, sigma: f64) -> Result<Self> {
        let p = ScrollParams { rho, q_mean, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho must lie in [0, 1] (got {})", self.rho)));
        }
        if !(self.q_mean > 0.0 && self.q_mean < 1.0) {
            return Err(Error::Config(format!(
                "q_mean must lie in (0, 1) (got {})",
                self.q_mean
            )));
        }
        let max_sigma = self.q_mean.min(1.0 - self.q_mean);
        if !(self.sigma >= 0.0 && self.sigma <= max_sigma + 1e-12) {
            return Err(Error::Config(format!(
                "sigma must lie in [0, {max_sigma}] (got {})",
                self.sigma
            )));
        }
        Ok(())
    }

    fn q_low(&self) -> f64 {
        (self.q_mean - self.sigma).max(0.0)
    }

    fn q_high(&self) -> f64 {
        (self.q_mean + self.sigma).min(1.0)
    }

    /// Mean reshare-run length, `E[1/q]`. Infinite when the support reaches 0.
    pub fn mean_run_length(&self) -> f64 {
        let (a, b) = (self.q_low(), self.q_high());
        if self.sigma == 0.0 {
            1.0 / self.q_mean
        } else if a <= 0.0 {
            f64::INFINITY
        } else {
            (b / a).ln() / (b - a)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionOutcome {
    NewPost,
    ReshareRun(u64),
}

/// Draws a reshare-run length (the reshare branch of a session).
pub fn sample_run_length<R: Rng + ?Sized>(params: &ScrollParams, rng: &mut R) -> u64 {
    let q = loop {
        let q = if params.sigma == 0.0 {
            params.q_mean
        } else {
            params.q_low() + (params.q_high() - params.q_low()) * rng.random::<f64>()
        };
        if q > 0.0 {
            break q;
        }
    };
    if q >= 1.0 {
        return 1;
    }
    // inverse CDF of the geometric distribution on {1, 2, ...}
    let u: f64 = 1.0 - rng.random::<f64>();
    let extra = (u.ln() / (1.0 - q).ln()).floor();
    if extra >= (u64::MAX / 2) as f64 {
        u64::MAX / 2
    } else {
        1 + extra as u64
    }
}

pub fn sample_session<R: Rng + ?Sized>(params: &ScrollParams, rng: &mut R) -> SessionOutcome {
    if params.rho >= 1.0 || (params.rho > 0.0 && rng.random::<f64>() < params.rho) {
        SessionOutcome::NewPost
    } else {
        SessionOutcome::ReshareRun(sample_run_length(params, rng))
    }
}

// Closed-form sigma is used down to this width; below it the difference
// of antiderivatives loses too many digits.
const CLOSED_FORM_MIN_SIGMA: f64 = 1e-3;

/// Probability that a reshare run has length exactly `alpha`:
/// the geometric pmf `q (1-q)^(alpha-1)` averaged over the uniform `q`.
pub fn session_pmf(params: &ScrollParams, alpha: u64) -> Result<f64> {
    if alpha < 1 {
        return Err(Error::Domain("run length alpha must be >= 1".into()));
    }
    let n = (alpha - 1) as f64;
    if params.sigma == 0.0 {
        let q = params.q_mean;
        return Ok(q * (1.0 - q).powf(n));
    }
    let (a, b) = (params.q_low(), params.q_high());
    if params.sigma >= CLOSED_FORM_MIN_SIGMA {
        // with u = 1 - q the integrand is u^n - u^(n+1); this antiderivative
        // is arranged to avoid cancellation near u = 1
        let anti = |u: f64| -> f64 {
            if u <= 0.0 {
                return 0.0;
            }
            ((n + 1.0) * u.ln()).exp() * (1.0 + (n + 1.0) * (1.0 - u)) / ((n + 1.0) * (n + 2.0))
        };
        Ok((anti(1.0 - a) - anti(1.0 - b)) / (b - a))
    } else {
        let f = |q: f64| q * (1.0 - q).powf(n);
        Ok(adaptive_simpson(&f, a, b, 1e-15) / (b - a))
    }
}

/// `P(run length > alpha)`.
pub fn session_ccdf(params: &ScrollParams, alpha: u64) -> f64 {
    let k = alpha as f64;
    if params.sigma == 0.0 {
        return (1.0 - params.q_mean).powf(k);
    }
    let (a, b) = (params.q_low(), params.q_high());
    if params.sigma >= CLOSED_FORM_MIN_SIGMA {
        let pw = |u: f64| if u <= 0.0 { 0.0 } else { ((k + 1.0) * u.ln()).exp() };
        (pw(1.0 - a) - pw(1.0 - b)) / ((k + 1.0) * (b - a))
    } else {
        adaptive_simpson(&|q: f64| (1.0 - q).powf(k), a, b, 1e-15) / (b - a)
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// Per-user `(n_t, n_r)`: posts and total reshares over `sessions_per_user`
/// sessions.
pub fn simulate_user_counts<R: Rng + ?Sized>(
    params: &ScrollParams,
    sessions_per_user: usize,
    users: usize,
    rng: &mut R,
) -> Vec<(u64, u64)> {
    let sessions_per_user = sessions_per_user.max(1);
    (0..users)
        .map(|_| {
            let (mut posts, mut reshares) = (0u64, 0u64);
            for _ in 0..sessions_per_user {
                match sample_session(params, rng) {
                    SessionOutcome::NewPost => posts += 1,
                    SessionOutcome::ReshareRun(len) => reshares = reshares.saturating_add(len),
                }
            }
            (posts, reshares)
        })
        .collect()
}

/// Per-user information load `n_t / (n_t + n_r)`; every session yields at
/// least one event so the ratio is always defined.
pub fn simulate_user_mu<R: Rng + ?Sized>(
    params: &ScrollParams,
    sessions_per_user: usize,
    users: usize,
    rng: &mut R,
) -> Vec<f64> {
    simulate_user_counts(params, sessions_per_user, users, rng)
        .into_iter()
        .map(|(t, r)| t as f64 / (t + r) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitTarget {
    /// Per-user information load; discrepancy is a binned chi-square distance.
    MuDist,
    /// Per-session run lengths; discrepancy is the KS statistic.
    AlphaDist,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl ParamRange {
    pub fn fixed(v: f64) -> Self {
        ParamRange { lo: v, hi: v, steps: 1 }
    }

    fn values(&self) -> Vec<f64> {
        if self.steps <= 1 || self.hi <= self.lo {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.lo + step * i as f64).collect()
    }

    fn step(&self) -> f64 {
        if self.steps <= 1 {
            0.0
        } else {
            (self.hi - self.lo) / (self.steps - 1) as f64
        }
    }
}

/// Search space for [`fit`]. `sigma_frac` is sigma as a fraction of its
/// upper bound `min(q_mean, 1 - q_mean)`, so every grid point is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub rho: ParamRange,
    pub q_mean: ParamRange,
    pub sigma_frac: ParamRange,
    /// Zoom rounds around the incumbent after the coarse grid.
    pub refine_rounds: usize,
    /// Monte Carlo users per evaluation (MuDist only).
    pub mc_users: usize,
    pub sessions_per_user: usize,
    pub mu_bins: usize,
    pub seed: u64,
}

impl SearchGrid {
    pub fn default_for(target: FitTarget) -> Self {
        match target {
            FitTarget::MuDist => SearchGrid {
                rho: ParamRange { lo: 0.90, hi: 1.0, steps: 11 },
                q_mean: ParamRange { lo: 0.05, hi: 0.30, steps: 6 },
                sigma_frac: ParamRange { lo: 0.0, hi: 0.9, steps: 4 },
                refine_rounds: 3,
                mc_users: 2000,
                sessions_per_user: 200,
                mu_bins: 20,
                seed: 1,
            },
            FitTarget::AlphaDist => SearchGrid {
                rho: ParamRange::fixed(0.05),
                q_mean: ParamRange { lo: 0.02, hi: 0.5, steps: 49 },
                sigma_frac: ParamRange { lo: 0.0, hi: 1.0, steps: 21 },
                refine_rounds: 4,
                mc_users: 0,
                sessions_per_user: 200,
                mu_bins: 20,
                seed: 1,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub round: usize,
    pub params: ScrollParams,
    pub discrepancy: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target: FitTarget,
    pub params: ScrollParams,
    pub discrepancy: f64,
    pub trace: Vec<TracePoint>,
}

/// Fits scroll parameters to an empirical histogram given as
/// `(value, weight)` pairs. For `AlphaDist` the posting probability is
/// not identifiable and is reported as `grid.rho.lo`.
pub fn fit(empirical: &[(f64, f64)], target: FitTarget, grid: &SearchGrid) -> Result<FitReport> {
    let total: f64 = empirical.iter().map(|&(_, w)| w).sum();
    if empirical.is_empty() || !(total > 0.0) {
        return Err(Error::Input("empirical histogram is empty".into()));
    }
    let objective: Box<dyn Fn(&ScrollParams) -> f64> = match target {
        FitTarget::AlphaDist => {
            let emp = alpha_ecdf(empirical, total)?;
            Box::new(move |p| alpha_ks(&emp, p))
        }
        FitTarget::MuDist => {
            let bins = grid.mu_bins.max(1);
            let emp = mu_histogram(empirical.iter().copied(), bins);
            let g = grid.clone();
            Box::new(move |p| {
                let mut r = rng::from_seed(g.seed);
                let sim = simulate_user_mu(p, g.sessions_per_user, g.mc_users.max(1), &mut r);
                let model = mu_histogram(sim.into_iter().map(|v| (v, 1.0)), bins);
                chi_square_distance(&emp, &model)
            })
        }
    };

    let make = |rho: f64, q: f64, frac: f64| ScrollParams {
        rho: if target == FitTarget::AlphaDist { grid.rho.lo } else { rho.clamp(0.0, 1.0) },
        q_mean: q.clamp(1e-4, 1.0 - 1e-4),
        sigma: frac.clamp(0.0, 1.0) * q.clamp(1e-4, 1.0 - 1e-4).min(1.0 - q.clamp(1e-4, 1.0 - 1e-4)),
    };

    let mut ranges = [grid.rho, grid.q_mean, grid.sigma_frac];
    if target == FitTarget::AlphaDist {
        ranges[0] = ParamRange::fixed(grid.rho.lo);
    }
    let mut best: Option<([f64; 3], f64)> = None;
    let mut trace = Vec::new();
    let mut evaluations = 0usize;

    for round in 0..=grid.refine_rounds {
        for &rho in &ranges[0].values() {
            for &q in &ranges[1].values() {
                for &frac in &ranges[2].values() {
                    let d = objective(&make(rho, q, frac));
                    evaluations += 1;
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some(([rho, q, frac], d));
                    }
                }
            }
        }
        let (point, d) = best.expect("grid is non-empty");
        trace.push(TracePoint {
            round,
            params: make(point[0], point[1], point[2]),
            discrepancy: d,
            evaluations,
        });
        // zoom: one previous step either side of the incumbent
        let bounds = [(0.0, 1.0), (1e-4, 1.0 - 1e-4), (0.0, 1.0)];
        for (ix, range) in ranges.iter_mut().enumerate() {
            let step = range.step();
            if step == 0.0 {
                continue;
            }
            let lo = (point[ix] - step).max(bounds[ix].0);
            let hi = (point[ix] + step).min(bounds[ix].1);
            *range = ParamRange { lo, hi, steps: 5 };
        }
    }
    let (point, discrepancy) = best.expect("grid is non-empty");
    Ok(FitReport {
        target,
        params: make(point[0], point[1], point[2]),
        discrepancy,
        trace,
    })
}

/// Empirical CDF of integer run lengths as sorted `(alpha, F(alpha))`.
fn alpha_ecdf(empirical: &[(f64, f64)], total: f64) -> Result<Vec<(u64, f64)>> {
    let mut pts: Vec<(u64, f64)> = Vec::with_capacity(empirical.len());
    for &(v, w) in empirical {
        if !(v >= 1.0) || v.fract() != 0.0 {
            return Err(Error::Input(format!("run length {v} is not a positive integer")));
        }
        pts.push((v as u64, w));
    }
    pts.sort_by_key(|p| p.0);
    let mut out: Vec<(u64, f64)> = Vec::new();
    let mut acc = 0.0;
    for (a, w) in pts {
        acc += w;
        match out.last_mut() {
            Some(last) if last.0 == a => last.1 = acc / total,
            _ => out.push((a, acc / total)),
        }
    }
    Ok(out)
}

fn alpha_ks(ecdf: &[(u64, f64)], p: &ScrollParams) -> f64 {
    let mut prev_emp = 0.0;
    let mut worst: f64 = 0.0;
    for &(a, f) in ecdf {
        let below = 1.0 - session_ccdf(p, a - 1);
        let at = 1.0 - session_ccdf(p, a);
        worst = worst.max((prev_emp - below).abs()).max((f - at).abs());
        prev_emp = f;
    }
    worst
}

/// Normalised histogram of mu values: `bins` equal-width bins on [0, 1)
/// plus a final bin holding exactly mu = 1.
pub fn mu_histogram<I: Iterator<Item = (f64, f64)>>(values: I, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins + 1];
    let mut total = 0.0;
    for (v, w) in values {
        let ix = if v >= 1.0 {
            bins
        } else {
            ((v.max(0.0) * bins as f64) as usize).min(bins - 1)
        };
        h[ix] += w;
        total += w;
    }
    if total > 0.0 {
        h.iter_mut().for_each(|x| *x /= total);
    }
    h
}

fn chi_square_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, y)| **x + **y > 0.0)
        .map(|(x, y)| (x - y) * (x - y) / (x + y))
        .sum()
}

/// Rows of `(alpha, probability)` for `alpha = 1..=max_alpha`.
pub fn pmf_table(params: &ScrollParams, max_alpha: u64) -> Vec<(u64, f64)> {
    (1..=max_alpha)
        .map(|a| (a, session_pmf(params, a).expect("alpha >= 1")))
        .collect()
}
