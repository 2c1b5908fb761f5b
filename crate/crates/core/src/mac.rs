//! Resolution of near-simultaneous TS-OOK responses.
//!
//! Responders pick a random back-off slot inside one symbol interval β;
//! the anchor separates replies whose arrival times differ by at least the
//! guard time. Replies that still overlap can be disambiguated afterwards by
//! discarding candidate positions that violate trilateration constraints.

use rand::Rng;
use thiserror::Error;

use crate::geometry::{NodeId, Point, Region};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
pub const DEFAULT_REFRACTIVE_INDEX: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacError {
    #[error("invalid back-off configuration: {0}")]
    InvalidConfig(String),
    #[error("{nodes} nodes but {distances} distances")]
    LengthMismatch { nodes: usize, distances: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffConfig {
    pub window_slots: u32,
    /// s
    pub slot_duration: f64,
    /// Minimum arrival separation an anchor can tell apart, s.
    pub guard_time: f64,
    /// In-tissue propagation speed, m/s.
    pub propagation_speed: f64,
}

impl BackoffConfig {
    /// The whole window is checked against `beta` (s) so responses fit in one symbol interval.
    pub fn new(
        window_slots: u32,
        slot_duration: f64,
        guard_time: f64,
        beta: f64,
    ) -> Result<Self, MacError> {
        let cfg = Self {
            window_slots,
            slot_duration,
            guard_time,
            propagation_speed: SPEED_OF_LIGHT / DEFAULT_REFRACTIVE_INDEX,
        };
        cfg.validate(beta)?;
        Ok(cfg)
    }

    pub fn with_refractive_index(mut self, n: f64) -> Self {
        self.propagation_speed = SPEED_OF_LIGHT / n;
        self
    }

    pub fn validate(&self, beta: f64) -> Result<(), MacError> {
        if self.window_slots == 0 {
            return Err(MacError::InvalidConfig("window must hold at least one slot".into()));
        }
        if !(self.guard_time > 0.0) {
            return Err(MacError::InvalidConfig("guard time must be positive".into()));
        }
        if !(self.slot_duration >= self.guard_time) {
            return Err(MacError::InvalidConfig(
                "slot duration must be at least the guard time".into(),
            ));
        }
        // relative slack for the product rounding
        if self.window_slots as f64 * self.slot_duration > beta * (1.0 + 1e-12) {
            return Err(MacError::InvalidConfig(format!(
                "{} slots of {} s exceed the symbol interval {} s",
                self.window_slots, self.slot_duration, beta
            )));
        }
        if !(self.propagation_speed.is_finite() && self.propagation_speed > 0.0) {
            return Err(MacError::InvalidConfig("propagation speed must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseEvent {
    pub node_id: NodeId,
    pub backoff_slot: u32,
    /// Round-trip propagation plus back-off offset, s.
    pub arrival_time: f64,
}

/// Each responder draws a uniform slot; distances are in mm.
pub fn draw_backoffs<R: Rng + ?Sized>(
    node_ids: &[NodeId],
    config: &BackoffConfig,
    distances_mm: &[f64],
    rng: &mut R,
) -> Result<Vec<ResponseEvent>, MacError> {
    if node_ids.len() != distances_mm.len() {
        return Err(MacError::LengthMismatch {
            nodes: node_ids.len(),
            distances: distances_mm.len(),
        });
    }
    Ok(node_ids
        .iter()
        .zip(distances_mm)
        .map(|(&node_id, &d)| {
            let slot = rng.random_range(0..config.window_slots);
            ResponseEvent {
                node_id,
                backoff_slot: slot,
                arrival_time: 2.0 * (d * 1e-3) / config.propagation_speed
                    + slot as f64 * config.slot_duration,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Resolution {
    pub distinguishable: Vec<NodeId>,
    pub collided: Vec<NodeId>,
}

/// Splits events into those separated from every other arrival by at least
/// the guard time and those that overlap something. Both lists follow
/// arrival order.
pub fn resolve(events: &[ResponseEvent], config: &BackoffConfig) -> Resolution {
    let mut order: Vec<&ResponseEvent> = events.iter().collect();
    order.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time).then(a.node_id.cmp(&b.node_id)));
    let mut out = Resolution::default();
    for (i, ev) in order.iter().enumerate() {
        let prev_ok = i == 0 || ev.arrival_time - order[i - 1].arrival_time >= config.guard_time;
        let next_ok =
            i + 1 == order.len() || order[i + 1].arrival_time - ev.arrival_time >= config.guard_time;
        if prev_ok && next_ok {
            out.distinguishable.push(ev.node_id);
        } else {
            out.collided.push(ev.node_id);
        }
    }
    out
}

/// Probability that at least two of `n` responders share one of `w` slots.
pub fn collision_probability(n: u32, w: u32) -> f64 {
    assert!(w >= 1, "window must hold at least one slot");
    if n > w {
        return 1.0;
    }
    // integer counts when they stay exact in f64, so small cases are exact ratios
    let (mut total, mut distinct) = (1u128, 1u128);
    let mut exact = true;
    for i in 0..n {
        match (total.checked_mul(w as u128), distinct.checked_mul((w - i) as u128)) {
            (Some(t), Some(d)) if t < 1u128 << 53 => {
                total = t;
                distinct = d;
            }
            _ => {
                exact = false;
                break;
            }
        }
    }
    if exact {
        return (total - distinct) as f64 / total as f64;
    }
    let mut all_distinct = 1.0;
    for i in 0..n {
        all_distinct *= (w - i) as f64 / w as f64;
    }
    1.0 - all_distinct
}

/// Radial band, inclusive at both ends, already covered by earlier iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    pub fn new(inner: f64, outer: f64, region: Region) -> Result<Self, MacError> {
        if !(inner >= 0.0 && inner < outer && outer <= region.radius()) {
            return Err(MacError::InvalidConfig(format!(
                "annulus [{inner}, {outer}] must satisfy 0 <= inner < outer <= {}",
                region.radius()
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn contains(&self, p: Point) -> bool {
        let r = p.norm();
        r >= self.inner && r <= self.outer
    }
}

/// Keeps the candidate positions inside the body and outside every covered annulus.
pub fn constraint_filter(candidates: &[Point], region: Region, covered: &[Annulus]) -> Vec<Point> {
    candidates
        .iter()
        .copied()
        .filter(|&p| region.contains(p) && !covered.iter().any(|a| a.contains(p)))
        .collect()
}
