use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nanoloc::geometry::{awoken_by, in_beam, place_nodes, BeamSector, Point, Region};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Independent point-in-sector test: compare the cosine of the off-axis angle
// against the cosine of the half width.
fn sector_oracle(p: Point, origin: Point, direction: f64, half_width: f64, reach: f64) -> bool {
    let (vx, vy) = (p.x - origin.x, p.y - origin.y);
    let len = (vx * vx + vy * vy).sqrt();
    if len == 0.0 {
        return true;
    }
    if len > reach {
        return false;
    }
    let cos = (vx * direction.cos() + vy * direction.sin()) / len;
    cos >= half_width.cos()
}

#[test]
fn orthogonal_sectors_match_grid_oracle() {
    let region = Region::default();
    let r = region.radius();
    let hw = 0.2;
    let b1 = BeamSector::new(region, Point::new(r, 0.0), PI, hw, 600.0).unwrap();
    let b2 = BeamSector::new(region, Point::new(0.0, r), -FRAC_PI_2, hw, 600.0).unwrap();
    let mut inside = 0;
    let mut mismatches = Vec::new();
    for ix in -300..=300 {
        for iy in -300..=300 {
            let p = Point::new(ix as f64, iy as f64);
            if !region.contains(p) {
                continue;
            }
            let got = awoken_by(p, &[b1, b2]).unwrap();
            let want = sector_oracle(p, b1.origin(), PI, hw, 600.0)
                && sector_oracle(p, b2.origin(), -FRAC_PI_2, hw, 600.0);
            // grid points within rounding distance of an edge may go either way
            let (c1, c2) = (
                ((p.x - r).abs() > 1e-9).then(|| ((p.y).atan2(r - p.x).abs() - hw).abs()),
                ((p.y - r).abs() > 1e-9).then(|| ((p.x).atan2(r - p.y).abs() - hw).abs()),
            );
            let near_edge = c1.is_some_and(|d| d < 1e-12) || c2.is_some_and(|d| d < 1e-12);
            if got != want && !near_edge {
                mismatches.push(p);
            }
            inside += got as usize;
        }
    }
    assert!(mismatches.is_empty(), "{} mismatches, first {:?}", mismatches.len(), mismatches[0]);
    // the two sectors cross around the origin
    assert!(inside > 100);
    assert!(awoken_by(Point::ORIGIN, &[b1, b2]).unwrap());
}

#[test]
fn placement_marginal_angles_are_uniform() {
    let region = Region::from_cm(10.0, 1.0).unwrap();
    let nodes = place_nodes(region, 10.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let mut quadrants = [0usize; 4];
    for p in nodes.positions() {
        let q = ((p.angle() + PI) / (PI / 2.0)).floor().min(3.0) as usize;
        quadrants[q] += 1;
    }
    let n = nodes.len() as f64;
    for q in quadrants {
        assert!((q as f64 / n - 0.25).abs() < 0.02, "{quadrants:?}");
    }
}

fn beam_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    // origin angle, aim offset from the inward normal, half width
    (0.0..2.0 * PI, -FRAC_PI_4..FRAC_PI_4, 0.01..1.5f64)
}

proptest! {
    #[test]
    fn adding_a_beam_never_grows_the_awoken_set(
        beams in prop::collection::vec(beam_strategy(), 1..4),
        extra in beam_strategy(),
        probes in prop::collection::vec((0.0..1.0f64, 0.0..2.0 * PI), 50),
    ) {
        let region = Region::default();
        let make = |(theta, offset, hw): (f64, f64, f64)| {
            let origin = region.boundary_point(theta);
            BeamSector::new(region, origin, theta + PI + offset, hw, 700.0).unwrap()
        };
        let base: Vec<BeamSector> = beams.into_iter().map(make).collect();
        let mut more = base.clone();
        more.push(make(extra));
        for (u, phi) in probes {
            let p = Point::polar(region.radius() * u.sqrt(), phi);
            if awoken_by(p, &more).unwrap() {
                prop_assert!(awoken_by(p, &base).unwrap());
            }
            prop_assert_eq!(awoken_by(p, &base[..1]).unwrap(), in_beam(p, &base[0]));
        }
    }
}
