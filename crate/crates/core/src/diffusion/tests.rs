use std::collections::HashMap;

use super::*;
use crate::netgen::{generate, Graph, NetSpec};

fn small_config(n: usize, m: usize, mu: f64, alpha: u32, tracked: usize) -> ModelConfig {
    let mut c = ModelConfig::fixed(n, m, mu, alpha);
    c.tracked_memes = tracked;
    c.replicas = 1;
    c.seed = 99;
    c
}

#[test]
fn full_load_never_reshares() {
    let cfg = small_config(50, 3, 1.0, 5, 200);
    let g = generate(&cfg.net).unwrap();
    let mut w = World::new(&cfg, &g).unwrap();
    for _ in 0..1000 {
        assert_eq!(w.step().kind, ShareKind::Injected);
    }
    assert_eq!(w.memes_created(), 1000);
    let res = run(&cfg, &g).unwrap();
    assert_eq!(res.records.len(), 200);
    assert!(res.records.iter().all(|r| r.popularity == 1));
}

#[test]
fn feeds_bounded_and_newest_first() {
    let cfg = small_config(100, 4, 0.2, 6, 10);
    let g = generate(&cfg.net).unwrap();
    let mut w = World::new(&cfg, &g).unwrap();
    for i in 0..20_000 {
        w.step();
        if i % 997 == 0 {
            for v in 0..100 {
                let f = w.feed(v);
                assert!(f.len() <= 6);
                let steps: Vec<u64> = f.iter().map(|m| m.created_step).collect();
                assert!(steps.windows(2).all(|p| p[0] > p[1]), "{steps:?}");
            }
        }
    }
    let msgs: u64 = (0..100).map(|v| w.feed(v).len() as u64).sum();
    assert_eq!(msgs, w.total_messages());
}

#[test]
fn popularity_equals_logged_share_events() {
    let cfg = small_config(80, 3, 0.15, 8, 10);
    let g = generate(&cfg.net).unwrap();
    let mut w = World::new(&cfg, &g).unwrap();
    w.enable_event_log();
    for _ in 0..100_000 {
        w.step();
    }
    let mut counted: HashMap<MemeId, u64> = HashMap::new();
    for &(_, m) in w.event_log().unwrap() {
        *counted.entry(m).or_default() += 1;
    }
    for id in 0..w.memes_created() as MemeId {
        assert_eq!(w.popularity(id), counted[&id], "meme {id}");
        // a dead meme has no message left anywhere
        if !w.is_alive(id) {
            assert!((0..80).all(|v| w.feed(v).iter().all(|m| m.meme != id)));
        }
    }
}

#[test]
fn live_counts_match_feed_contents() {
    let cfg = small_config(60, 2, 0.3, 4, 10);
    let g = generate(&cfg.net).unwrap();
    let mut w = World::new(&cfg, &g).unwrap();
    for _ in 0..30_000 {
        w.step();
    }
    let mut counted: HashMap<MemeId, u64> = HashMap::new();
    for v in 0..60 {
        for m in w.feed(v).iter() {
            *counted.entry(m.meme).or_default() += 1;
        }
    }
    let mut reported: HashMap<MemeId, u64> = w.feed_meme_counts().into_iter().collect();
    assert_eq!(reported.len(), w.distinct_memes());
    for (id, c) in counted {
        assert_eq!(reported.remove(&id), Some(c));
    }
    assert!(reported.is_empty());
}

#[test]
fn deterministic_given_seed() {
    let cfg = small_config(120, 3, 0.2, 5, 300);
    let g = generate(&cfg.net).unwrap();
    let a = run(&cfg, &g).unwrap();
    let b = run(&cfg, &g).unwrap();
    assert_eq!(a, b);
    let c = run(&cfg.with_seed(100), &g).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn zero_load_fixates_on_one_meme() {
    let cfg = small_config(100, 3, 0.0, 5, 10);
    let g = generate(&cfg.net).unwrap();
    let mut w = World::new(&cfg, &g).unwrap();
    let res = super::run::run_world(&cfg, &mut w).unwrap();
    assert!(res.records.is_empty());
    assert_eq!(w.distinct_memes(), 1);
    assert_eq!(res.mean_entropy(), 0.0);
    // every node gets activated again with overwhelming probability
    for _ in 0..100 * 25 {
        w.step();
    }
    let states = w.snapshot_node_states();
    assert_eq!(states.len(), 100);
    assert!(states.iter().all(|s| s.meme == states[0].meme));
}

#[test]
fn two_agents_terminate() {
    let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
    let mut cfg = small_config(2, 1, 0.5, 1, 100);
    cfg.net = NetSpec::barabasi_albert(2, 1, 0);
    let res = run(&cfg, &g).unwrap();
    assert_eq!(res.records.len(), 100);
    assert!(res.records.iter().all(|r| r.popularity >= 1 && r.death_step.is_some()));
}

#[test]
fn snapshot_sizes() {
    let cfg = small_config(128, 5, 0.1, 10, 10);
    let g = generate(&cfg.net).unwrap();
    let mut w = World::new(&cfg, &g).unwrap();
    assert!(w.snapshot_node_states().is_empty());
    for _ in 0..128 * 30 {
        w.step();
    }
    assert_eq!(w.snapshot_node_states().len(), 128);
}

#[test]
fn empty_feed_falls_back_to_injection() {
    let cfg = small_config(30, 2, 0.0, 3, 1);
    let g = generate(&cfg.net).unwrap();
    let mut w = World::new(&cfg, &g).unwrap();
    let first = w.step();
    assert_eq!(first.kind, ShareKind::FallbackInjected);
    assert_eq!(w.popularity(first.meme), 1);
}

#[test]
fn steady_state_cap_is_reported() {
    let mut cfg = small_config(50, 2, 0.1, 5, 10);
    cfg.steady_state.max_steps = 500;
    cfg.steady_state.min_burn_in = 1000;
    let g = generate(&cfg.net).unwrap();
    match run(&cfg, &g) {
        Err(crate::Error::SteadyStateNotReached { cap }) => assert_eq!(cap, 500),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn tracking_cap_is_reported() {
    let mut cfg = small_config(50, 2, 0.1, 5, 1000);
    cfg.step_cap = 100;
    let g = generate(&cfg.net).unwrap();
    assert!(matches!(run(&cfg, &g), Err(crate::Error::StepCapExceeded { cap: 100 })));
}

#[test]
fn detector_needs_two_flat_windows() {
    let policy = SteadyStatePolicy { window: 3, min_burn_in: 0, ..Default::default() };
    let mut d = SteadyStateDetector::new(&policy);
    for x in [10.0, 20.0, 30.0, 40.0, 50.0] {
        assert!(!d.push(x));
    }
    assert!(!d.push(60.0));
    let mut d = SteadyStateDetector::new(&policy);
    let flat = [100.0, 101.0, 99.0, 100.0, 100.0];
    for x in flat {
        assert!(!d.push(x));
    }
    assert!(d.push(100.0));
}

#[test]
fn invalid_config_rejected() {
    let mut cfg = small_config(50, 2, 1.5, 5, 10);
    let g = generate(&NetSpec::barabasi_albert(50, 2, 0)).unwrap();
    assert!(matches!(run(&cfg, &g), Err(crate::Error::Config(_))));
    cfg.mu_mode = MuMode::Fixed(0.5);
    cfg.alpha_mode = AlphaMode::Fixed(0);
    assert!(matches!(run(&cfg, &g), Err(crate::Error::Config(_))));
    cfg.alpha_mode = AlphaMode::Fixed(3);
    cfg.steady_state.window = 1;
    assert!(matches!(run(&cfg, &g), Err(crate::Error::Config(_))));
}

#[test]
fn heterogeneous_modes_run() {
    use crate::calib::{DistKind, EmpiricalDist};
    use crate::scrolling::ScrollParams;
    use std::sync::Arc;

    let g = generate(&NetSpec::barabasi_albert(100, 3, 2)).unwrap();
    let mu = Arc::new(EmpiricalDist::from_weighted(DistKind::MuPerUser, [(0.1, 1.0), (1.0, 1.0)]).unwrap());
    let alpha = Arc::new(EmpiricalDist::from_weighted(DistKind::AlphaPerSession, [(2.0, 1.0), (30.0, 1.0)]).unwrap());
    let mut cfg = small_config(100, 3, 0.2, 5, 300);
    cfg.mu_mode = MuMode::Empirical(mu);
    cfg.alpha_mode = AlphaMode::Empirical { dist: alpha.clone(), per_activation: false };
    let w = World::new(&cfg, &g).unwrap();
    assert!(w.agent_mu().iter().all(|&m| m == 0.1 || m == 1.0));
    assert!(w.feed_capacities().iter().all(|&c| c == 2 || c == 30));
    assert_eq!(run(&cfg, &g).unwrap().records.len(), 300);

    cfg.alpha_mode = AlphaMode::Empirical { dist: alpha, per_activation: true };
    assert!(World::new(&cfg, &g).unwrap().feed_capacities().iter().all(|&c| c == 30));
    assert_eq!(run(&cfg, &g).unwrap().records.len(), 300);

    cfg.alpha_mode = AlphaMode::Scrolling(ScrollParams::new(0.0, 0.1, 0.09).unwrap());
    cfg.feed_cap = 64;
    assert_eq!(run(&cfg, &g).unwrap().records.len(), 300);
}
