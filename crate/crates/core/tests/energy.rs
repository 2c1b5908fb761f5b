use nanoloc::channel::TsOokParams;
use nanoloc::energy::{
    apply_wakeup, consume, harvest, idle_fraction, EnergyError, EnergyState, HarvestProfile,
    NodeRole, WakeupCodebook,
};
use nanoloc::geometry::Point;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Harvest { x: f64, y: f64, dt: f64 },
    Consume(f64),
    Wake(Vec<bool>),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (-300.0..300.0f64, -300.0..300.0f64, 0.0..50.0f64).prop_map(|(x, y, dt)| Op::Harvest { x, y, dt }),
        (0.0..150.0f64).prop_map(Op::Consume),
        prop::collection::vec(any::<bool>(), 0..=4).prop_map(Op::Wake),
    ]
}

proptest! {
    #[test]
    fn stored_energy_stays_within_capacity(
        start in 0.0..100.0f64,
        capacity in 0.0..200.0f64,
        threshold in 0.0..50.0f64,
        ops in prop::collection::vec(op(), 0..200),
    ) {
        let profile = HarvestProfile::default();
        let codebook = WakeupCodebook::default();
        let mut s = EnergyState::new(start, capacity, threshold).unwrap();
        for op in ops {
            s = match op {
                Op::Harvest { x, y, dt } => harvest(s, &profile, Point::new(x, y), dt),
                Op::Consume(a) => match consume(s, a) {
                    Ok(next) => next,
                    Err(EnergyError::Depleted { state, .. }) => {
                        prop_assert!(!state.is_awake());
                        state
                    }
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                },
                Op::Wake(frames) => {
                    let below = s.stored() < s.turn_on_threshold();
                    let next = apply_wakeup(s, &frames, &codebook).unwrap();
                    if below {
                        prop_assert!(!next.is_awake());
                        prop_assert_eq!(next.role(), NodeRole::Asleep);
                    }
                    next
                }
            };
            prop_assert!(s.stored() >= 0.0 && s.stored() <= s.capacity());
        }
    }

    #[test]
    fn idle_fraction_monotonicity(
        pps in 0.0..1e3f64,
        more in 0.0..1e3f64,
        p_idle in 0.0..1e3f64,
        extra_idle in 0.0..1e3f64,
        bits in 1u64..256,
        ones in 0.0..1.0f64,
    ) {
        let base = TsOokParams { p_idle, ..TsOokParams::default() };
        let f = idle_fraction(&base, pps, bits, ones);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(idle_fraction(&base, pps + more, bits, ones) <= f);
        let idler = TsOokParams { p_idle: p_idle + extra_idle, ..TsOokParams::default() };
        prop_assert!(idle_fraction(&idler, pps, bits, ones) >= f);
    }
}

#[test]
fn idling_dominates_at_defaults() {
    let f = idle_fraction(&TsOokParams::default(), 1.0, 8, 0.5);
    assert!((f - 100.0 / 104.0).abs() < 1e-12);
    assert!(f > 0.9);
}

#[test]
fn every_role_needs_the_full_sequence() {
    let book = WakeupCodebook::default();
    let charged = EnergyState::new(50.0, 100.0, 10.0).unwrap();
    for (pattern, role) in book.entries() {
        let woke = apply_wakeup(charged, pattern, &book).unwrap();
        assert_eq!(woke.role(), role);
        assert!(woke.is_awake());
        for cut in 0..pattern.len() {
            assert_eq!(apply_wakeup(charged, &pattern[..cut], &book).unwrap().role(), NodeRole::Asleep);
        }
        // dropping any received frame leaves the node asleep
        for i in (0..pattern.len()).filter(|&i| pattern[i]) {
            let mut missed = pattern.to_vec();
            missed[i] = false;
            assert_eq!(apply_wakeup(charged, &missed, &book).unwrap().role(), NodeRole::Asleep);
        }
    }
    assert!(apply_wakeup(charged, &[true; 5], &book).is_err());
}
