//! Empirical distributions of information load and attention: CSV
//! ingestion, inverse-CDF samplers, and the mean-based calibration.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scrolling::{self, ScrollParams, SessionOutcome};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    MuPerUser,
    AlphaPerSession,
    PopularityCounts,
}

/// Weighted discrete distribution over sorted, distinct support values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    pub kind: DistKind,
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
    pub sample_count: u64,
}

impl EmpiricalDist {
    /// Aggregates unit-weight observations.
    pub fn from_values<I: IntoIterator<Item = f64>>(kind: DistKind, values: I) -> Result<Self> {
        Self::from_weighted(kind, values.into_iter().map(|v| (v, 1.0)))
    }

    pub fn from_weighted<I: IntoIterator<Item = (f64, f64)>>(kind: DistKind, pairs: I) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        let sample_count = pairs.len() as u64;
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (v, w) in pairs {
            if support.last() == Some(&v) {
                *weights.last_mut().unwrap() += w;
            } else {
                support.push(v);
                weights.push(w);
            }
        }
        let d = EmpiricalDist {
            kind,
            support,
            weights,
            sample_count,
        };
        d.validate()?;
        Ok(d)
    }

    /// Point mass at `value`.
    pub fn point(kind: DistKind, value: f64) -> Result<Self> {
        Self::from_values(kind, [value])
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.len() != self.weights.len() {
            return Err(Error::Input("support and weights differ in length".into()));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Input("negative or NaN weight".into()));
        }
        if !(self.total_weight() > 0.0) {
            return Err(Error::Input("distribution has no mass".into()));
        }
        let ok = match self.kind {
            DistKind::MuPerUser => self.support.iter().all(|v| (0.0..=1.0).contains(v)),
            DistKind::AlphaPerSession | DistKind::PopularityCounts => {
                self.support.iter().all(|&v| v >= 1.0 && v.fract() == 0.0)
            }
        };
        if !ok {
            return Err(Error::Input(format!("support values out of range for {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let t = self.total_weight();
        self.support.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>() / t
    }

    pub fn min(&self) -> f64 {
        self.support[0]
    }

    pub fn max(&self) -> f64 {
        *self.support.last().unwrap()
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.support.iter().copied().zip(self.weights.iter().copied()).collect()
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self)
    }
}

/// Rows read versus kept during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows: usize,
    pub accepted: usize,
    pub skipped: usize,
}

fn read_two_columns<R: Read>(input: R, header: [&str; 2]) -> Result<Vec<(String, u64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let hdr = rdr.headers()?.clone();
    if hdr.len() < 2 || hdr.get(0) != Some(header[0]) || hdr.get(1) != Some(header[1]) {
        return Err(Error::Input(format!(
            "expected header `{},{}`, found `{}`",
            header[0],
            header[1],
            hdr.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let key = rec.get(0).unwrap_or_default().to_string();
        let val = rec
            .get(1)
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| Error::Input(format!("row {}: `{}` is not a count", i + 2, header[1])))?;
        rows.push((key, val));
    }
    Ok(rows)
}

/// Reads `user_id,n_t,n_r` rows into per-user `mu = n_t / (n_t + n_r)`.
/// Users with no activity are skipped and counted in the report.
pub fn ingest_mu<R: Read>(input: R) -> Result<(EmpiricalDist, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let hdr = rdr.headers()?.clone();
    if hdr.iter().collect::<Vec<_>>() != ["user_id", "n_t", "n_r"] {
        return Err(Error::Input(format!(
            "expected header `user_id,n_t,n_r`, found `{}`",
            hdr.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        rows += 1;
        let field = |ix: usize| -> Result<u64> {
            rec.get(ix)
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| Error::Input(format!("row {}: bad count in column {}", i + 2, ix + 1)))
        };
        let (nt, nr) = (field(1)?, field(2)?);
        if nt + nr >= 1 {
            values.push(nt as f64 / (nt + nr) as f64);
        }
    }
    let report = IngestReport {
        rows,
        accepted: values.len(),
        skipped: rows - values.len(),
    };
    if values.is_empty() {
        return Err(Error::Input("no user with n_t + n_r >= 1".into()));
    }
    Ok((EmpiricalDist::from_values(DistKind::MuPerUser, values)?, report))
}

/// Reads `session_id,stops` rows; sessions with zero stops are dropped.
pub fn ingest_alpha<R: Read>(input: R) -> Result<(EmpiricalDist, IngestReport)> {
    ingest_counts(input, ["session_id", "stops"], DistKind::AlphaPerSession)
}

/// Reads `item,count` share counts; zero counts are dropped.
pub fn ingest_popularity<R: Read>(input: R) -> Result<(EmpiricalDist, IngestReport)> {
    ingest_counts(input, ["item", "count"], DistKind::PopularityCounts)
}

fn ingest_counts<R: Read>(input: R, header: [&str; 2], kind: DistKind) -> Result<(EmpiricalDist, IngestReport)> {
    let rows = read_two_columns(input, header)?;
    let values: Vec<f64> = rows.iter().filter(|r| r.1 > 0).map(|r| r.1 as f64).collect();
    let report = IngestReport {
        rows: rows.len(),
        accepted: values.len(),
        skipped: rows.len() - values.len(),
    };
    if values.is_empty() {
        return Err(Error::Input(format!("no positive `{}` values", header[1])));
    }
    Ok((EmpiricalDist::from_values(kind, values)?, report))
}

/// Inverse-CDF sampler over a weighted support.
#[derive(Debug, Clone)]
pub struct Sampler {
    support: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(dist: &EmpiricalDist) -> Self {
        let mut acc = 0.0;
        let cumulative = dist
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Sampler {
            support: dist.support.clone(),
            cumulative,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let ix = self.cumulative.partition_point(|&c| c <= u);
        self.support[ix.min(self.support.len() - 1)]
    }

    pub fn stream<'a, R: Rng + ?Sized>(&'a self, rng: &'a mut R) -> impl Iterator<Item = f64> + 'a {
        std::iter::repeat_with(move || self.sample(rng))
    }

    pub fn max(&self) -> f64 {
        *self.support.last().unwrap()
    }
}

/// Mean-based calibration: weighted mean load and mean attention rounded
/// to the nearest integer (at least 1).
pub fn naive_params(mu: &EmpiricalDist, alpha: &EmpiricalDist) -> (f64, u32) {
    let a = alpha.mean().round().max(1.0);
    (mu.mean(), a as u32)
}

/// Synthetic `(n_t, n_r)` corpus from the scrolling model.
pub fn standin_mu_rows<R: Rng + ?Sized>(
    params: &ScrollParams,
    users: usize,
    sessions_per_user: usize,
    rng: &mut R,
) -> Vec<(u64, u64)> {
    scrolling::simulate_user_counts(params, sessions_per_user, users, rng)
}

/// Synthetic per-session stop counts; post-only sessions record zero stops.
pub fn standin_alpha_rows<R: Rng + ?Sized>(params: &ScrollParams, sessions: usize, rng: &mut R) -> Vec<u64> {
    (0..sessions)
        .map(|_| match scrolling::sample_session(params, rng) {
            SessionOutcome::NewPost => 0,
            SessionOutcome::ReshareRun(n) => n,
        })
        .collect()
}

pub fn write_mu_csv<W: Write>(out: W, rows: &[(u64, u64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "n_t", "n_r"])?;
    for (i, (t, r)) in rows.iter().enumerate() {
        w.write_record([i.to_string(), t.to_string(), r.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<mu csv>", e))
}

pub fn write_alpha_csv<W: Write>(out: W, stops: &[u64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["session_id", "stops"])?;
    for (i, s) in stops.iter().enumerate() {
        w.write_record([i.to_string(), s.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<alpha csv>", e))
}

/// Scroll parameters behind the shipped stand-in corpora.
pub mod standin {
    use std::fs::File;
    use std::path::Path;

    use super::{standin_alpha_rows, standin_mu_rows, write_alpha_csv, write_mu_csv, ScrollParams};
    use crate::{rng, Error, Result};

    pub const MU_PARAMS: ScrollParams = ScrollParams { rho: 0.978, q_mean: 0.1, sigma: 0.09 };
    pub const ALPHA_PARAMS_NARROW: ScrollParams = ScrollParams { rho: 0.05, q_mean: 0.1, sigma: 0.02 };
    pub const ALPHA_PARAMS_WIDE: ScrollParams = ScrollParams { rho: 0.05, q_mean: 0.1, sigma: 0.09 };
    pub const SESSIONS_PER_USER: usize = 200;

    pub const MU_CSV: &str = include_str!("../data/standin_mu.csv");
    pub const ALPHA_NARROW_CSV: &str = include_str!("../data/standin_alpha_sigma002.csv");
    pub const ALPHA_WIDE_CSV: &str = include_str!("../data/standin_alpha_sigma009.csv");

    pub const MU_USERS: usize = 10_000;
    pub const ALPHA_SESSIONS: usize = 50_000;

    /// Regenerates the three stand-in corpora into `dir`.
    pub fn write_all(dir: &Path, seed: u64) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let path = dir.join(name);
            File::create(&path).map_err(|e| Error::io(path, e))
        };
        let mut r = rng::from_seed(rng::derive_seed(seed, &[0]));
        write_mu_csv(create("standin_mu.csv")?, &standin_mu_rows(&MU_PARAMS, MU_USERS, SESSIONS_PER_USER, &mut r))?;
        let mut r = rng::from_seed(rng::derive_seed(seed, &[1]));
        write_alpha_csv(
            create("standin_alpha_sigma002.csv")?,
            &standin_alpha_rows(&ALPHA_PARAMS_NARROW, ALPHA_SESSIONS, &mut r),
        )?;
        let mut r = rng::from_seed(rng::derive_seed(seed, &[2]));
        write_alpha_csv(
            create("standin_alpha_sigma009.csv")?,
            &standin_alpha_rows(&ALPHA_PARAMS_WIDE, ALPHA_SESSIONS, &mut r),
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn mu_ingestion_formula_and_skips() {
        let csv = "user_id,n_t,n_r\na,3,1\nb,0,5\nc,0,0\n";
        let (d, rep) = ingest_mu(csv.as_bytes()).unwrap();
        assert_eq!(rep, IngestReport { rows: 3, accepted: 2, skipped: 1 });
        assert_eq!(d.support, vec![0.0, 0.75]);
        assert_eq!(d.weights, vec![1.0, 1.0]);
    }

    #[test]
    fn ingestion_errors() {
        assert!(matches!(ingest_mu("user_id,n_t,n_r\nx,0,0\n".as_bytes()), Err(Error::Input(_))));
        assert!(matches!(ingest_mu("id,a,b\nx,1,0\n".as_bytes()), Err(Error::Input(_))));
        assert!(matches!(ingest_mu("user_id,n_t,n_r\nx,-1,0\n".as_bytes()), Err(Error::Input(_))));
        assert!(matches!(ingest_alpha("session_id,stops\n1,0\n".as_bytes()), Err(Error::Input(_))));
    }

    #[test]
    fn alpha_point_mass() {
        let (d, rep) = ingest_alpha("session_id,stops\n1,5\n2,5\n3,5\n4,0\n".as_bytes()).unwrap();
        assert_eq!(rep.skipped, 1);
        assert_eq!(d.support, vec![5.0]);
        assert_eq!(d.mean(), 5.0);
        let s = d.sampler();
        let mut r = rng::from_seed(1);
        assert!(s.stream(&mut r).take(100).all(|v| v == 5.0));
    }

    #[test]
    fn ingestion_is_lossless() {
        let counts = [3u64, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5];
        let mut csv = String::from("item,count\n");
        for (i, c) in counts.iter().enumerate() {
            csv.push_str(&format!("{i},{c}\n"));
        }
        let (d, _) = ingest_popularity(csv.as_bytes()).unwrap();
        for (v, w) in d.pairs() {
            let n = counts.iter().filter(|&&c| c as f64 == v).count();
            assert_eq!(w, n as f64);
        }
        assert_eq!(d.total_weight(), counts.len() as f64);
    }

    #[test]
    fn two_point_sampler_mean() {
        let d = EmpiricalDist::from_weighted(DistKind::AlphaPerSession, [(1.0, 0.5), (9.0, 0.5)]).unwrap();
        let s = d.sampler();
        let mut r = rng::from_seed(77);
        let n = 1_000_000;
        let mean = s.stream(&mut r).take(n).sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn naive_params_rounding() {
        let mu = EmpiricalDist::point(DistKind::MuPerUser, 0.5).unwrap();
        let a = EmpiricalDist::point(DistKind::AlphaPerSession, 10.0).unwrap();
        assert_eq!(naive_params(&mu, &a), (0.5, 10));
        let a = EmpiricalDist::from_weighted(DistKind::AlphaPerSession, [(1.0, 0.6), (2.0, 0.4)]).unwrap();
        assert_eq!(naive_params(&mu, &a).1, 1);
        let a = EmpiricalDist::from_weighted(DistKind::AlphaPerSession, [(14.0, 0.8), (15.0, 0.2)]).unwrap();
        assert_eq!(naive_params(&mu, &a).1, 14);
    }

    #[test]
    fn shipped_standins_load() {
        let (mu, _) = ingest_mu(standin::MU_CSV.as_bytes()).unwrap();
        assert!((mu.mean() - 0.75).abs() < 0.03, "{}", mu.mean());
        let (wide, _) = ingest_alpha(standin::ALPHA_WIDE_CSV.as_bytes()).unwrap();
        let (narrow, _) = ingest_alpha(standin::ALPHA_NARROW_CSV.as_bytes()).unwrap();
        assert!(wide.max() > narrow.max());
    }

    proptest::proptest! {
        #[test]
        fn sampler_stays_in_support(ws in proptest::collection::vec((1u32..50, 0.01f64..5.0), 1..20), seed in 0u64..1000) {
            let d = EmpiricalDist::from_weighted(
                DistKind::AlphaPerSession,
                ws.iter().map(|&(v, w)| (v as f64, w)),
            ).unwrap();
            let s = d.sampler();
            let mut r = rng::from_seed(seed);
            for v in s.stream(&mut r).take(200) {
                proptest::prop_assert!(d.support.contains(&v));
            }
        }

        #[test]
        fn naive_params_ignore_duplication(vals in proptest::collection::vec(0u32..=100, 1..30)) {
            let mu = EmpiricalDist::from_values(DistKind::MuPerUser, vals.iter().map(|&v| v as f64 / 100.0)).unwrap();
            let mu2 = EmpiricalDist::from_values(
                DistKind::MuPerUser,
                vals.iter().chain(vals.iter()).map(|&v| v as f64 / 100.0),
            ).unwrap();
            let a = EmpiricalDist::from_values(DistKind::AlphaPerSession, vals.iter().map(|&v| (v + 1) as f64)).unwrap();
            let a2 = EmpiricalDist::from_values(
                DistKind::AlphaPerSession,
                vals.iter().chain(vals.iter()).map(|&v| (v + 1) as f64),
            ).unwrap();
            let (m1, a1) = naive_params(&mu, &a);
            let (m2, a2v) = naive_params(&mu2, &a2);
            proptest::prop_assert!((m1 - m2).abs() < 1e-12);
            proptest::prop_assert_eq!(a1, a2v);
        }
    }
}
