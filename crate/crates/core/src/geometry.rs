//! Planar torso-slice geometry: the disk region, node placement, and the
//! directional ultrasound beam sectors used for wake-up addressing.
//!
//! All lengths are millimeters. The slice thickness only matters when a
//! volumetric density is turned into a node count; positions are 2D.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("point ({x}, {y}) lies outside the region of radius {radius} mm")]
    OutsideRegion { x: f64, y: f64, radius: f64 },
    #[error("invalid beam sector: {0}")]
    InvalidBeam(String),
    #[error("wake-up requires at least one beam")]
    NoBeams,
    #[error("density must be finite and non-negative, got {0}")]
    InvalidDensity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at distance `r` from the origin in direction `theta`.
    pub fn polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Circular slice of the torso centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    radius: f64,
    thickness: f64,
}

impl Default for Region {
    fn default() -> Self {
        Self {
            radius: 300.0,
            thickness: 10.0,
        }
    }
}

impl Region {
    /// Region from radius and thickness in millimeters.
    pub fn new(radius_mm: f64, thickness_mm: f64) -> Result<Self, GeometryError> {
        if !(radius_mm.is_finite() && radius_mm > 0.0) {
            return Err(GeometryError::InvalidRegion(format!(
                "radius must be positive, got {radius_mm}"
            )));
        }
        if !(thickness_mm.is_finite() && thickness_mm > 0.0) {
            return Err(GeometryError::InvalidRegion(format!(
                "thickness must be positive, got {thickness_mm}"
            )));
        }
        Ok(Self {
            radius: radius_mm,
            thickness: thickness_mm,
        })
    }

    /// Region from radius and thickness in centimeters.
    pub fn from_cm(radius_cm: f64, thickness_cm: f64) -> Result<Self, GeometryError> {
        Self::new(radius_cm * 10.0, thickness_cm * 10.0)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn contains(&self, p: Point) -> bool {
        p.norm_sq() <= self.radius * self.radius
    }

    /// Slice volume in cm³.
    pub fn volume_cm3(&self) -> f64 {
        let r_cm = self.radius / 10.0;
        PI * r_cm * r_cm * (self.thickness / 10.0)
    }

    /// Number of nodes for a volumetric density given per cm³.
    pub fn node_count(&self, density_per_cm3: f64) -> usize {
        (self.volume_cm3() * density_per_cm3).round() as usize
    }

    /// Point on the boundary at polar angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Point {
        Point::polar(self.radius, theta)
    }

    /// `count` boundary points evenly spaced in angle, starting at angle 0.
    pub fn boundary_anchors(&self, count: usize) -> Vec<Point> {
        (0..count)
            .map(|i| self.boundary_point(2.0 * PI * i as f64 / count as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nanonode {
    pub id: NodeId,
    /// Ground-truth position.
    pub position: Point,
}

/// Nodes of one trial. Node `i` always carries `NodeId(i)`.
#[derive(Debug, Clone)]
pub struct NodeSet {
    nodes: Vec<Nanonode>,
    region: Region,
}

impl NodeSet {
    /// Builds a set from explicit positions; ids are assigned in order.
    pub fn from_positions(region: Region, positions: &[Point]) -> Result<Self, GeometryError> {
        let mut nodes = Vec::with_capacity(positions.len());
        for (i, &p) in positions.iter().enumerate() {
            if !region.contains(p) {
                return Err(GeometryError::OutsideRegion {
                    x: p.x,
                    y: p.y,
                    radius: region.radius,
                });
            }
            nodes.push(Nanonode {
                id: NodeId(i as u32),
                position: p,
            });
        }
        Ok(Self { nodes, region })
    }

    pub fn nodes(&self) -> &[Nanonode] {
        &self.nodes
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<&Nanonode> {
        self.nodes.get(id.0 as usize)
    }

    pub fn positions(&self) -> impl Iterator<Item = Point> + '_ {
        self.nodes.iter().map(|n| n.position)
    }
}

/// Places `round(volume · density)` nodes uniformly over the disk.
///
/// Rejection sampling from the bounding square keeps every accepted point
/// exactly inside the region, with no trigonometric rounding at the rim.
pub fn place_nodes<R: Rng + ?Sized>(
    region: Region,
    density_per_cm3: f64,
    rng: &mut R,
) -> Result<NodeSet, GeometryError> {
    if !(density_per_cm3.is_finite() && density_per_cm3 >= 0.0) {
        return Err(GeometryError::InvalidDensity(density_per_cm3));
    }
    let count = region.node_count(density_per_cm3);
    let r = region.radius;
    let r_sq = r * r;
    let mut nodes = Vec::with_capacity(count);
    while nodes.len() < count {
        let x = rng.random_range(-r..=r);
        let y = rng.random_range(-r..=r);
        let p = Point::new(x, y);
        if p.norm_sq() <= r_sq {
            nodes.push(Nanonode {
                id: NodeId(nodes.len() as u32),
                position: p,
            });
        }
    }
    Ok(NodeSet { nodes, region })
}

pub fn distance_to_boundary(p: Point, region: Region) -> Result<f64, GeometryError> {
    if !region.contains(p) {
        return Err(GeometryError::OutsideRegion {
            x: p.x,
            y: p.y,
            radius: region.radius,
        });
    }
    Ok((region.radius - p.norm()).max(0.0))
}

/// Directed ultrasound wake-up beam emitted from the region boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSector {
    origin: Point,
    direction: f64,
    half_width: f64,
    max_reach: f64,
}

pub const DEFAULT_BEAM_REACH_MM: f64 = 500.0;

impl BeamSector {
    pub fn new(
        region: Region,
        origin: Point,
        direction: f64,
        half_width: f64,
        max_reach: f64,
    ) -> Result<Self, GeometryError> {
        let rel = (origin.norm() - region.radius).abs() / region.radius;
        if rel > 1e-9 {
            return Err(GeometryError::InvalidBeam(format!(
                "origin ({}, {}) is not on the boundary",
                origin.x, origin.y
            )));
        }
        if !(half_width > 0.0 && half_width < FRAC_PI_2) {
            return Err(GeometryError::InvalidBeam(format!(
                "half width {half_width} rad outside (0, pi/2)"
            )));
        }
        if !(max_reach.is_finite() && max_reach > 0.0) {
            return Err(GeometryError::InvalidBeam(format!(
                "max reach must be positive, got {max_reach}"
            )));
        }
        if !direction.is_finite() {
            return Err(GeometryError::InvalidBeam("direction is not finite".into()));
        }
        Ok(Self {
            origin,
            direction,
            half_width,
            max_reach,
        })
    }

    /// Beam from `origin` pointing straight at `target`.
    pub fn aimed_at(
        region: Region,
        origin: Point,
        target: Point,
        half_width: f64,
    ) -> Result<Self, GeometryError> {
        let direction = (target - origin).angle();
        Self::new(region, origin, direction, half_width, DEFAULT_BEAM_REACH_MM)
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn direction(&self) -> f64 {
        self.direction
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn max_reach(&self) -> f64 {
        self.max_reach
    }

    pub fn contains(&self, p: Point) -> bool {
        let v = p - self.origin;
        let dist = v.norm();
        if dist > self.max_reach {
            return false;
        }
        if dist == 0.0 {
            return true;
        }
        let axis = Point::polar(1.0, self.direction);
        let off_axis = v.cross(axis).abs().atan2(v.dot(axis));
        off_axis <= self.half_width
    }
}

pub fn in_beam(p: Point, beam: &BeamSector) -> bool {
    beam.contains(p)
}

/// A node wakes only when it lies inside every beam of the sequence.
pub fn awoken_by(p: Point, beams: &[BeamSector]) -> Result<bool, GeometryError> {
    if beams.is_empty() {
        return Err(GeometryError::NoBeams);
    }
    Ok(beams.iter().all(|b| b.contains(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn region() -> Region {
        Region::default()
    }

    #[test]
    fn node_count_matches_volume_times_density() {
        // round(pi * 30^2 * 1 * 10) computed by hand: 28274.33 -> 28274
        let expected = (std::f64::consts::PI * 900.0 * 10.0).round() as usize;
        assert_eq!(expected, 28274);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let set = place_nodes(region(), 10.0, &mut rng).unwrap();
        assert_eq!(set.len(), 28274);
        assert!(set.positions().all(|p| p.norm() <= 300.0));
        for (i, n) in set.nodes().iter().enumerate() {
            assert_eq!(n.id, NodeId(i as u32));
        }
    }

    #[test]
    fn zero_density_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(place_nodes(region(), 0.0, &mut rng).unwrap().is_empty());
        assert!(place_nodes(region(), -1.0, &mut rng).is_err());
    }

    #[test]
    fn placement_is_seed_deterministic() {
        let a = place_nodes(region(), 1.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = place_nodes(region(), 1.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.nodes(), b.nodes());
    }

    #[test]
    fn placement_is_uniform_over_area() {
        let r = Region::new(10.0, 10.0).unwrap();
        // 1e5 nodes: volume is pi cm^3
        let density = 1e5 / r.volume_cm3();
        let set = place_nodes(r, density, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let inner = set
            .positions()
            .filter(|p| p.norm() <= 10.0 / 2f64.sqrt())
            .count();
        let frac = inner as f64 / set.len() as f64;
        assert!((frac - 0.5).abs() < 0.01, "fraction {frac}");
    }

    #[test]
    fn boundary_distances() {
        let r = region();
        assert_eq!(distance_to_boundary(Point::ORIGIN, r).unwrap(), 300.0);
        assert_eq!(distance_to_boundary(Point::new(295.0, 0.0), r).unwrap(), 5.0);
        assert_eq!(distance_to_boundary(Point::new(300.0, 0.0), r).unwrap(), 0.0);
        assert!(matches!(
            distance_to_boundary(Point::new(301.0, 0.0), r),
            Err(GeometryError::OutsideRegion { .. })
        ));
    }

    #[test]
    fn boundary_distance_plus_norm_is_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let set = place_nodes(region(), 0.5, &mut rng).unwrap();
        for p in set.positions() {
            let d = distance_to_boundary(p, region()).unwrap();
            assert!(((d + p.norm()) - 300.0).abs() <= 300.0 * 1e-12);
        }
    }

    #[test]
    fn region_validation() {
        assert!(Region::new(0.0, 1.0).is_err());
        assert!(Region::new(1.0, -1.0).is_err());
        assert!(Region::new(f64::NAN, 1.0).is_err());
        let r = Region::from_cm(30.0, 1.0).unwrap();
        assert_eq!(r, Region::default());
    }

    #[test]
    fn beam_on_axis_and_off_sector() {
        let r = region();
        let beam = BeamSector::new(r, Point::new(300.0, 0.0), PI, 10f64.to_radians(), 500.0)
            .unwrap();
        assert!(in_beam(Point::new(290.0, 0.0), &beam));
        assert!(!in_beam(Point::new(300.0, 50.0), &beam));
        // reach limit
        let short = BeamSector::new(r, Point::new(300.0, 0.0), PI, 0.2, 100.0).unwrap();
        assert!(!in_beam(Point::new(150.0, 0.0), &short));
    }

    #[test]
    fn beam_validation() {
        let r = region();
        assert!(BeamSector::new(r, Point::new(100.0, 0.0), 0.0, 0.1, 500.0).is_err());
        assert!(BeamSector::new(r, Point::new(300.0, 0.0), 0.0, 0.0, 500.0).is_err());
        assert!(BeamSector::new(r, Point::new(300.0, 0.0), 0.0, FRAC_PI_2, 500.0).is_err());
        assert!(BeamSector::new(r, Point::new(300.0, 0.0), 0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn awoken_by_is_conjunction() {
        let r = region();
        let b1 = BeamSector::aimed_at(r, Point::new(300.0, 0.0), Point::ORIGIN, 0.2).unwrap();
        let b2 = BeamSector::aimed_at(r, Point::new(0.0, 300.0), Point::ORIGIN, 0.2).unwrap();
        assert!(awoken_by(Point::new(1.0, 1.0), &[b1, b2]).unwrap());
        // on b1's axis only
        assert!(!awoken_by(Point::new(200.0, 0.0), &[b1, b2]).unwrap());
        for p in [Point::new(200.0, 0.0), Point::new(0.0, 200.0), Point::ORIGIN] {
            assert_eq!(awoken_by(p, &[b1]).unwrap(), in_beam(p, &b1));
        }
        assert_eq!(awoken_by(Point::ORIGIN, &[]), Err(GeometryError::NoBeams));
    }
}
