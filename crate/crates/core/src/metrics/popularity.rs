//! Popularity distributions and their relation to quality.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Log-binned density of positive integer samples. Bins are integer
/// ranges `[lo, hi)` whose edges grow by `factor`; empty bins are omitted.
/// Rows are `(bin center, density)` with density = count / (n * width).
pub fn log_binned_pdf(samples: &[u64], factor: f64) -> Vec<(f64, f64)> {
    let positive: Vec<u64> = samples.iter().copied().filter(|&x| x >= 1).collect();
    let Some(&max) = positive.iter().max() else {
        return Vec::new();
    };
    let factor = if factor > 1.0 { factor } else { 2.0 };
    let mut edges = vec![1u64];
    while *edges.last().unwrap() <= max {
        let last = *edges.last().unwrap();
        edges.push(((last as f64 * factor).ceil() as u64).max(last + 1));
    }
    let mut counts = vec![0u64; edges.len() - 1];
    for &x in &positive {
        let ix = edges.partition_point(|&e| e <= x) - 1;
        counts[ix] += 1;
    }
    let n = positive.len() as f64;
    edges
        .windows(2)
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| {
            let (lo, hi) = (w[0], w[1]);
            let center = ((lo as f64) * ((hi - 1) as f64)).sqrt();
            (center, c as f64 / (n * (hi - lo) as f64))
        })
        .collect()
}

/// `(value, P(X >= value))` at every distinct value, ascending.
pub fn ccdf(samples: &[u64]) -> Vec<(u64, f64)> {
    let mut s = samples.to_vec();
    s.sort_unstable();
    let n = s.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        out.push((v, (s.len() - i) as f64 / n));
        while i < s.len() && s[i] == v {
            i += 1;
        }
    }
    out
}

/// Two-sample Kolmogorov–Smirnov distance between empirical CDFs.
pub fn ks_two_sample(a: &[u64], b: &[u64]) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Some(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityBin {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

/// Equal-width quality bins over (0, 1]; empty bins are omitted.
pub fn mean_popularity_by_quality(records: &[(f64, u64)], bins: usize) -> Vec<QualityBin> {
    let bins = bins.max(1);
    let mut acc = vec![(0usize, 0.0f64, 0.0f64); bins];
    for &(f, p) in records {
        let ix = ((f * bins as f64).ceil() as usize).clamp(1, bins) - 1;
        let p = p as f64;
        acc[ix].0 += 1;
        acc[ix].1 += p;
        acc[ix].2 += p * p;
    }
    let width = 1.0 / bins as f64;
    acc.iter()
        .enumerate()
        .filter(|(_, a)| a.0 > 0)
        .map(|(i, &(n, s, s2))| {
            let nf = n as f64;
            let mean = s / nf;
            let var = if n > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
            QualityBin {
                lo: i as f64 * width,
                hi: (i + 1) as f64 * width,
                mid: (i as f64 + 0.5) * width,
                mean,
                std_err: (var / nf).sqrt(),
                count: n,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityGroups {
    pub threshold: f64,
    pub high: Vec<u64>,
    pub low: Vec<u64>,
    pub high_ccdf: Vec<(u64, f64)>,
    pub low_ccdf: Vec<(u64, f64)>,
    pub high_empty: bool,
    pub low_empty: bool,
    /// KS distance between the two groups; absent if either is empty.
    pub ks_distance: Option<f64>,
    /// Larger group maximum over the smaller one; absent if either is empty.
    pub max_ratio: Option<f64>,
}

/// Splits records at `threshold` (high group: `f >= threshold`).
pub fn popularity_by_quality_group(records: &[(f64, u64)], threshold: f64) -> Result<QualityGroups> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!("threshold must lie in (0, 1) (got {threshold})")));
    }
    let (hi, lo): (Vec<&(f64, u64)>, Vec<&(f64, u64)>) = records.iter().partition(|r| r.0 >= threshold);
    let high: Vec<u64> = hi.into_iter().map(|r| r.1).collect();
    let low: Vec<u64> = lo.into_iter().map(|r| r.1).collect();
    let max_ratio = match (high.iter().max(), low.iter().max()) {
        (Some(&a), Some(&b)) => Some(a.max(b) as f64 / a.min(b).max(1) as f64),
        _ => None,
    };
    Ok(QualityGroups {
        threshold,
        high_ccdf: ccdf(&high),
        low_ccdf: ccdf(&low),
        high_empty: high.is_empty(),
        low_empty: low.is_empty(),
        ks_distance: ks_two_sample(&high, &low),
        max_ratio,
        high,
        low,
    })
}
