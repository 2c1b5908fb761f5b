use nanoloc::geometry::{NodeId, Point, Region};
use nanoloc::mac::{
    collision_probability, constraint_filter, draw_backoffs, resolve, Annulus, BackoffConfig,
    ResponseEvent,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn pairwise_oracle(events: &[ResponseEvent], guard: f64) -> (Vec<NodeId>, Vec<NodeId>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (i, a) in events.iter().enumerate() {
        let clash = events
            .iter()
            .enumerate()
            .any(|(j, b)| i != j && (a.arrival_time - b.arrival_time).abs() < guard);
        if clash { bad.push(a.node_id) } else { ok.push(a.node_id) }
    }
    ok.sort();
    bad.sort();
    (ok, bad)
}

fn events_strategy() -> impl Strategy<Value = Vec<(u32, f64)>> {
    prop::collection::vec((0u32..8, 0.0..30.0f64), 0..12)
}

#[test]
fn slots_are_uniform_by_chi_square() {
    let w = 16;
    let cfg = BackoffConfig::new(w, 1e-12, 1e-13, 1e-10).unwrap();
    let n = 100_000;
    let ids: Vec<NodeId> = (0..n).map(NodeId).collect();
    let dist = vec![5.0; n as usize];
    let events = draw_backoffs(&ids, &cfg, &dist, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let mut counts = vec![0f64; w as usize];
    for e in &events {
        counts[e.backoff_slot as usize] += 1.0;
    }
    let expected = n as f64 / w as f64;
    let stat: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((w - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn five_mixed_events_match_pairwise_oracle() {
    let cfg = BackoffConfig::new(8, 1e-12, 1e-12, 1e-10).unwrap();
    let times = [0.0, 0.5e-12, 3e-12, 6e-12, 7.2e-12];
    let events: Vec<ResponseEvent> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| ResponseEvent { node_id: NodeId(i as u32), backoff_slot: 0, arrival_time: t })
        .collect();
    let r = resolve(&events, &cfg);
    let (ok, bad) = pairwise_oracle(&events, cfg.guard_time);
    let (mut got_ok, mut got_bad) = (r.distinguishable, r.collided);
    got_ok.sort();
    got_bad.sort();
    assert_eq!((got_ok, got_bad), (ok, bad));
}

#[test]
fn collision_probability_matches_enumeration_for_small_windows() {
    for w in 1u32..=8 {
        for n in 0u32..=4 {
            let total = (w as u64).pow(n);
            let mut colliding = 0u64;
            for code in 0..total {
                let mut seen = [false; 8];
                let mut c = code;
                let mut clash = false;
                for _ in 0..n {
                    let s = (c % w as u64) as usize;
                    c /= w as u64;
                    clash |= seen[s];
                    seen[s] = true;
                }
                colliding += clash as u64;
            }
            assert_eq!(collision_probability(n, w), colliding as f64 / total as f64, "n={n} w={w}");
        }
    }
}

#[test]
fn monte_carlo_collision_rate_converges_to_analytic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (n, w) in [(2u32, 10u32), (3, 3), (4, 16), (6, 32)] {
        // equal distances and a vanishing guard leave only slot clashes
        let cfg = BackoffConfig::new(w, 1e-12, 1e-18, 1e-9).unwrap();
        let ids: Vec<NodeId> = (0..n).map(NodeId).collect();
        let dist = vec![12.0; n as usize];
        let trials = 100_000;
        let mut hits = 0u32;
        for _ in 0..trials {
            let ev = draw_backoffs(&ids, &cfg, &dist, &mut rng).unwrap();
            hits += !resolve(&ev, &cfg).collided.is_empty() as u32;
        }
        let p = collision_probability(n, w);
        let rate = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((rate - p).abs() <= 3.0 * se.max(1e-12), "n={n} w={w}: {rate} vs {p}");
    }
}

#[test]
fn event_sets_match_pairwise_oracle() {
    let cfg = BackoffConfig::new(32, 1e-12, 1e-12, 1e-10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let n = rng.random_range(0..10u32);
        let ids: Vec<NodeId> = (0..n).map(NodeId).collect();
        let dist: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let ev = draw_backoffs(&ids, &cfg, &dist, &mut rng).unwrap();
        let r = resolve(&ev, &cfg);
        let (mut ok, mut bad) = (r.distinguishable, r.collided);
        ok.sort();
        bad.sort();
        assert_eq!((ok, bad), pairwise_oracle(&ev, cfg.guard_time));
    }
}

proptest! {
    #[test]
    fn resolve_partitions_events(raw in events_strategy()) {
        let cfg = BackoffConfig::new(8, 1e-12, 1e-12, 1e-10).unwrap();
        let events: Vec<ResponseEvent> = raw
            .iter()
            .enumerate()
            .map(|(i, &(slot, d))| ResponseEvent {
                node_id: NodeId(i as u32),
                backoff_slot: slot,
                arrival_time: 2.0 * d * 1e-3 / cfg.propagation_speed + slot as f64 * cfg.slot_duration,
            })
            .collect();
        let r = resolve(&events, &cfg);
        let mut all: Vec<NodeId> = r.distinguishable.iter().chain(&r.collided).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..events.len() as u32).map(NodeId).collect::<Vec<_>>());
    }

    #[test]
    fn constraint_filter_is_idempotent_and_order_preserving(
        pts in prop::collection::vec((-350.0..350.0f64, -350.0..350.0f64), 0..40),
        inner in 0.0..250.0f64,
        width in 1.0..50.0f64,
    ) {
        let region = Region::default();
        let covered = [Annulus::new(inner, (inner + width).min(region.radius()), region).unwrap()];
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let once = constraint_filter(&pts, region, &covered);
        prop_assert_eq!(&constraint_filter(&once, region, &covered), &once);
        // kept points appear in their original relative order
        let mut it = pts.iter();
        for p in &once {
            prop_assert!(it.any(|q| q == p));
        }
    }
}
