//! Discrete power-law fitting: maximum-likelihood exponent for each
//! candidate lower cutoff, cutoff chosen by minimum KS distance.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Minimum number of samples at or above `x_min` for a reportable fit.
pub const MIN_TAIL: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub beta: f64,
    pub x_min: u64,
    pub ks_distance: f64,
    pub n_tail: usize,
}

// B_2, B_4, ..., B_14 over (2j)!
const BERNOULLI_OVER_FACT: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
];

/// Hurwitz zeta `sum_{k >= 0} (a + k)^-s` for `s > 1`, `a > 0`:
/// direct summation of the head, Euler–Maclaurin for the tail.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    const HEAD: usize = 12;
    let mut sum = 0.0;
    for k in 0..HEAD {
        sum += (a + k as f64).powf(-s);
    }
    let x = a + HEAD as f64;
    let x_s = x.powf(-s);
    sum += x * x_s / (s - 1.0) + 0.5 * x_s;
    // B_2j/(2j)! * s (s+1) ... (s+2j-2) * x^(-s-2j+1)
    let mut rising = s;
    let mut xpow = x_s / x;
    let inv_x2 = 1.0 / (x * x);
    for (j, coef) in BERNOULLI_OVER_FACT.iter().enumerate() {
        if j > 0 {
            rising *= (s + (2 * j - 1) as f64) * (s + (2 * j) as f64);
            xpow *= inv_x2;
        }
        sum += coef * rising * xpow;
    }
    sum
}

fn neg_log_likelihood(beta: f64, x_min: u64, n: f64, sum_ln: f64) -> f64 {
    n * hurwitz_zeta(beta, x_min as f64).ln() + beta * sum_ln
}

/// Golden-section search for the exponent; the objective is convex in beta.
fn mle_beta(x_min: u64, n: f64, sum_ln: f64) -> f64 {
    let (mut lo, mut hi) = (1.0 + 1e-6, 12.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = neg_log_likelihood(c, x_min, n, sum_ln);
    let mut fd = neg_log_likelihood(d, x_min, n, sum_ln);
    while hi - lo > 1e-9 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = neg_log_likelihood(c, x_min, n, sum_ln);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = neg_log_likelihood(d, x_min, n, sum_ln);
        }
    }
    0.5 * (lo + hi)
}

/// Maximum-likelihood fit above a fixed cutoff `x_min`.
pub fn fit_with_xmin(samples: &[u64], x_min: u64) -> Result<PowerLawFit> {
    let mut tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    tail.sort_unstable();
    fit_sorted_tail(&tail, x_min)
}

fn fit_sorted_tail(tail: &[u64], x_min: u64) -> Result<PowerLawFit> {
    if tail.len() < MIN_TAIL {
        return Err(Error::FitUnavailable(format!(
            "{} samples at or above x_min={x_min}, need {MIN_TAIL}",
            tail.len()
        )));
    }
    if tail.first() == tail.last() {
        return Err(Error::FitUnavailable("tail has a single distinct value".into()));
    }
    let n = tail.len() as f64;
    let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    let beta = mle_beta(x_min, n, sum_ln);
    let norm = hurwitz_zeta(beta, x_min as f64);

    let mut ks: f64 = 0.0;
    let mut i = 0;
    while i < tail.len() {
        let x = tail[i];
        let mut j = i;
        while j < tail.len() && tail[j] == x {
            j += 1;
        }
        let emp = j as f64 / n;
        let model = 1.0 - hurwitz_zeta(beta, (x + 1) as f64) / norm;
        ks = ks.max((emp - model).abs());
        i = j;
    }
    Ok(PowerLawFit {
        beta,
        x_min,
        ks_distance: ks,
        n_tail: tail.len(),
    })
}

/// Scans candidate cutoffs (distinct values up to the 90th percentile)
/// and keeps the fit with the smallest KS distance.
pub fn fit_power_law(samples: &[u64]) -> Result<PowerLawFit> {
    let mut sorted: Vec<u64> = samples.iter().copied().filter(|&x| x >= 1).collect();
    sorted.sort_unstable();
    if sorted.len() < MIN_TAIL {
        return Err(Error::FitUnavailable(format!(
            "{} positive samples, need {MIN_TAIL}",
            sorted.len()
        )));
    }
    let cap = sorted[((sorted.len() - 1) as f64 * 0.9).floor() as usize];
    let mut best: Option<PowerLawFit> = None;
    let mut start = 0;
    while start < sorted.len() && sorted[start] <= cap {
        let x_min = sorted[start];
        if let Ok(fit) = fit_sorted_tail(&sorted[start..], x_min) {
            if best.is_none_or(|b| fit.ks_distance < b.ks_distance) {
                best = Some(fit);
            }
        }
        while start < sorted.len() && sorted[start] == x_min {
            start += 1;
        }
    }
    best.ok_or_else(|| Error::FitUnavailable("no admissible x_min".into()))
}
