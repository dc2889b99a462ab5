use memesim::calib::{
    ingest_alpha, ingest_mu, ingest_popularity, naive_params, standin, DistKind, EmpiricalDist,
};
use memesim::rng::from_seed;

#[test]
fn mu_ingestion_computes_ratios_and_skips_idle_users() {
    let csv = "user_id,n_t,n_r\nu1,1,3\nu2,0,0\nu3,5,0\nu4,0,7\n";
    let (dist, report) = ingest_mu(csv.as_bytes()).unwrap();
    assert_eq!((report.rows, report.accepted, report.skipped), (4, 3, 1));
    assert_eq!(dist.support, vec![0.0, 0.25, 1.0]);
    assert_eq!(dist.weights, vec![1.0, 1.0, 1.0]);
    assert!((dist.mean() - 1.25 / 3.0).abs() < 1e-12);
}

#[test]
fn alpha_ingestion_drops_zero_stop_sessions() {
    let csv = "session_id,stops\na,3\nb,0\nc,3\nd,10\n";
    let (dist, report) = ingest_alpha(csv.as_bytes()).unwrap();
    assert_eq!((report.rows, report.accepted, report.skipped), (4, 3, 1));
    assert_eq!(dist.support, vec![3.0, 10.0]);
    assert_eq!(dist.weights, vec![2.0, 1.0]);
    assert_eq!(dist.sample_count, 3);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(ingest_mu("user,n_t,n_r\n1,1,1\n".as_bytes()).is_err());
    assert!(ingest_mu("user_id,n_t,n_r\n1,x,1\n".as_bytes()).is_err());
    assert!(ingest_mu("user_id,n_t,n_r\n1,0,0\n".as_bytes()).is_err());
    assert!(ingest_alpha("session_id,stops\n1,-2\n".as_bytes()).is_err());
    assert!(ingest_alpha("session_id,stops\n1,0\n".as_bytes()).is_err());
    assert!(ingest_popularity("item,shares\n1,2\n".as_bytes()).is_err());
}

#[test]
fn ingestion_is_lossless_on_shipped_corpora() {
    let (alpha, report) = ingest_alpha(standin::ALPHA_WIDE_CSV.as_bytes()).unwrap();
    let nonzero: Vec<f64> = standin::ALPHA_WIDE_CSV
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .filter(|&v| v > 0.0)
        .collect();
    assert_eq!(report.rows, standin::ALPHA_SESSIONS);
    assert_eq!(report.accepted, nonzero.len());
    assert_eq!(alpha.total_weight(), nonzero.len() as f64);
    let direct = nonzero.iter().sum::<f64>() / nonzero.len() as f64;
    assert!((alpha.mean() - direct).abs() < 1e-9);
}

#[test]
fn shipped_corpora_have_expected_shapes() {
    let (mu, mu_report) = ingest_mu(standin::MU_CSV.as_bytes()).unwrap();
    assert_eq!(mu_report.rows, standin::MU_USERS);
    assert!((0.70..0.82).contains(&mu.mean()), "mu mean {}", mu.mean());
    let (narrow, _) = ingest_alpha(standin::ALPHA_NARROW_CSV.as_bytes()).unwrap();
    let (wide, _) = ingest_alpha(standin::ALPHA_WIDE_CSV.as_bytes()).unwrap();
    assert!(wide.mean() > narrow.mean());
    assert!(wide.max() > narrow.max());
    assert!((9.0..12.0).contains(&narrow.mean()), "narrow mean {}", narrow.mean());
}

#[test]
fn shipped_corpora_regenerate_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    standin::write_all(dir.path(), 2017).unwrap();
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();
    assert_eq!(read("standin_mu.csv"), standin::MU_CSV);
    assert_eq!(read("standin_alpha_sigma002.csv"), standin::ALPHA_NARROW_CSV);
    assert_eq!(read("standin_alpha_sigma009.csv"), standin::ALPHA_WIDE_CSV);
}

#[test]
fn sampler_reproduces_source_frequencies() {
    let dist = EmpiricalDist::from_weighted(
        DistKind::AlphaPerSession,
        [(1.0, 5.0), (2.0, 1.0), (7.0, 3.0), (40.0, 1.0)],
    )
    .unwrap();
    let sampler = dist.sampler();
    let mut rng = from_seed(8);
    let n = 400_000;
    let mut counts = std::collections::HashMap::new();
    for v in sampler.stream(&mut rng).take(n) {
        *counts.entry(v as u64).or_insert(0u64) += 1;
    }
    for (v, w) in dist.pairs() {
        let p = w / dist.total_weight();
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        let got = *counts.get(&(v as u64)).unwrap_or(&0) as f64;
        assert!((got - p * n as f64).abs() < 3.0 * sd, "value {v}: {got}");
    }
    assert_eq!(counts.len(), 4);
}

#[test]
fn two_point_sampler_mean() {
    let dist = EmpiricalDist::from_values(DistKind::AlphaPerSession, [1.0, 9.0]).unwrap();
    let sampler = dist.sampler();
    let mut rng = from_seed(9);
    let n = 200_000;
    let mean = sampler.stream(&mut rng).take(n).sum::<f64>() / n as f64;
    assert!((mean - 5.0).abs() < 0.05, "{mean}");
}

#[test]
fn naive_params_are_means_with_rounded_attention() {
    let mu = EmpiricalDist::from_values(DistKind::MuPerUser, [0.5, 1.0]).unwrap();
    let alpha = EmpiricalDist::from_values(DistKind::AlphaPerSession, [1.0, 2.0, 3.0, 8.0]).unwrap();
    assert_eq!(naive_params(&mu, &alpha), (0.75, 4));
    let one = EmpiricalDist::point(DistKind::AlphaPerSession, 1.0).unwrap();
    assert_eq!(naive_params(&mu, &one).1, 1);
}

#[test]
fn naive_params_ignore_duplication() {
    let mu_vals = [0.1, 0.3, 0.35, 0.9];
    let alpha_vals = [2.0, 5.0, 5.0, 30.0];
    let mu = EmpiricalDist::from_values(DistKind::MuPerUser, mu_vals).unwrap();
    let alpha = EmpiricalDist::from_values(DistKind::AlphaPerSession, alpha_vals).unwrap();
    let mu2 = EmpiricalDist::from_values(DistKind::MuPerUser, mu_vals.iter().chain(&mu_vals).copied()).unwrap();
    let alpha2 =
        EmpiricalDist::from_values(DistKind::AlphaPerSession, alpha_vals.iter().chain(&alpha_vals).copied()).unwrap();
    let (m1, a1) = naive_params(&mu, &alpha);
    let (m2, a2) = naive_params(&mu2, &alpha2);
    assert!((m1 - m2).abs() < 1e-12);
    assert_eq!(a1, a2);
}

#[test]
fn out_of_range_support_is_rejected() {
    assert!(EmpiricalDist::from_values(DistKind::MuPerUser, [0.5, 1.2]).is_err());
    assert!(EmpiricalDist::from_values(DistKind::AlphaPerSession, [0.5]).is_err());
    assert!(EmpiricalDist::from_values(DistKind::AlphaPerSession, []).is_err());
}
