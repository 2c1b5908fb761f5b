//! Energy-harvesting node model: storage bounded by capacity, harvesting
//! that depends on where the node is, consumption with graceful depletion,
//! and the role a node takes after a directional wake-up sequence.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::channel::TsOokParams;
use crate::geometry::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("node depleted: needed {needed} pJ, had {available} pJ")]
    Depleted {
        needed: f64,
        available: f64,
        /// State after depletion: empty storage, asleep.
        state: EnergyState,
    },
    #[error("wake-up sequence of {got} frames exceeds the codebook pattern length {max}")]
    SequenceTooLong { got: usize, max: usize },
    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),
    #[error("invalid energy parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRole {
    Asleep,
    Localize,
    VirtualAnchor,
    Relay,
    Application,
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeRole::Asleep => "ASLEEP",
            NodeRole::Localize => "LOCALIZE",
            NodeRole::VirtualAnchor => "VIRTUAL_ANCHOR",
            NodeRole::Relay => "RELAY",
            NodeRole::Application => "APPLICATION",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyState {
    stored: f64,
    capacity: f64,
    turn_on_threshold: f64,
    awake: bool,
    role: NodeRole,
}

impl EnergyState {
    /// Asleep node; `stored` is clamped into `[0, capacity]`. All values in pJ.
    pub fn new(stored: f64, capacity: f64, turn_on_threshold: f64) -> Result<Self, EnergyError> {
        if !(capacity.is_finite() && capacity >= 0.0) {
            return Err(EnergyError::InvalidParameter(format!(
                "capacity must be non-negative, got {capacity}"
            )));
        }
        if !(turn_on_threshold.is_finite() && turn_on_threshold >= 0.0) {
            return Err(EnergyError::InvalidParameter(format!(
                "turn-on threshold must be non-negative, got {turn_on_threshold}"
            )));
        }
        if stored.is_nan() {
            return Err(EnergyError::InvalidParameter("stored energy is NaN".into()));
        }
        Ok(Self {
            stored: stored.clamp(0.0, capacity),
            capacity,
            turn_on_threshold,
            awake: false,
            role: NodeRole::Asleep,
        })
    }

    pub fn stored(&self) -> f64 {
        self.stored
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn turn_on_threshold(&self) -> f64 {
        self.turn_on_threshold
    }

    pub fn is_awake(&self) -> bool {
        self.awake
    }

    pub fn role(&self) -> NodeRole {
        self.role
    }

    pub fn sleep(mut self) -> Self {
        self.awake = false;
        self.role = NodeRole::Asleep;
        self
    }

    /// Wakes into `role` if enough energy is stored; otherwise stays asleep.
    pub fn wake(mut self, role: NodeRole) -> Self {
        if role == NodeRole::Asleep || self.stored < self.turn_on_threshold {
            return self.sleep();
        }
        self.awake = true;
        self.role = role;
        self
    }
}

/// Location-dependent harvest rate: `base_rate`, multiplied by
/// `hotspot_gain` inside a disk around `hotspot_center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestProfile {
    /// pW
    pub base_rate: f64,
    pub hotspot_center: Point,
    pub hotspot_gain: f64,
    /// mm
    pub hotspot_radius: f64,
}

impl Default for HarvestProfile {
    fn default() -> Self {
        Self {
            base_rate: 1.0,
            hotspot_center: Point::new(-50.0, 40.0),
            hotspot_gain: 10.0,
            hotspot_radius: 60.0,
        }
    }
}

impl HarvestProfile {
    pub fn validate(&self) -> Result<(), EnergyError> {
        if !(self.base_rate.is_finite() && self.base_rate >= 0.0) {
            return Err(EnergyError::InvalidParameter("base_rate must be non-negative".into()));
        }
        if !(self.hotspot_gain.is_finite() && self.hotspot_gain >= 1.0) {
            return Err(EnergyError::InvalidParameter("hotspot_gain must be at least 1".into()));
        }
        if !(self.hotspot_radius.is_finite() && self.hotspot_radius >= 0.0) {
            return Err(EnergyError::InvalidParameter(
                "hotspot_radius must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// pW at `location`.
    pub fn rate_at(&self, location: Point) -> f64 {
        if location.distance(self.hotspot_center) <= self.hotspot_radius {
            self.base_rate * self.hotspot_gain
        } else {
            self.base_rate
        }
    }
}

pub fn harvest(state: EnergyState, profile: &HarvestProfile, location: Point, dt: f64) -> EnergyState {
    let gained = profile.rate_at(location) * dt.max(0.0);
    EnergyState {
        stored: (state.stored + gained).min(state.capacity),
        ..state
    }
}

/// Draws `amount` pJ; a node that cannot pay is emptied and put to sleep.
pub fn consume(state: EnergyState, amount: f64) -> Result<EnergyState, EnergyError> {
    let amount = amount.max(0.0);
    if state.stored >= amount {
        return Ok(EnergyState {
            stored: state.stored - amount,
            ..state
        });
    }
    let depleted = EnergyState {
        stored: 0.0,
        ..state
    }
    .sleep();
    Err(EnergyError::Depleted {
        needed: amount,
        available: state.stored,
        state: depleted,
    })
}

/// Share of one second's energy spent idling, for a node sending
/// `packets_per_second` packets of `bits_per_packet` bits with the given
/// fraction of ones.
pub fn idle_fraction(
    params: &TsOokParams,
    packets_per_second: f64,
    bits_per_packet: u64,
    ones_fraction: f64,
) -> f64 {
    let pulses = packets_per_second.max(0.0)
        * bits_per_packet as f64
        * ones_fraction.clamp(0.0, 1.0)
        * params.e_tx_pulse;
    let idle = params.p_idle;
    let total = pulses + idle;
    if total <= 0.0 {
        0.0
    } else {
        idle / total
    }
}

/// Maps wake-up frame presence patterns to roles.
///
/// A frame counts as received only if the node sat inside every beam of it.
/// Patterns all have the same length and no pattern's hits are a subset of
/// another's, so losing any frame of a codeword can never decode as a
/// different role. Anything that matches no pattern leaves the node asleep.
#[derive(Debug, Clone, PartialEq)]
pub struct WakeupCodebook {
    patterns: BTreeMap<Vec<bool>, NodeRole>,
    pattern_len: usize,
}

impl WakeupCodebook {
    pub fn new(entries: impl IntoIterator<Item = (Vec<bool>, NodeRole)>) -> Result<Self, EnergyError> {
        let mut patterns = BTreeMap::new();
        let mut pattern_len = None;
        for (pattern, role) in entries {
            if role == NodeRole::Asleep {
                return Err(EnergyError::InvalidCodebook("ASLEEP cannot be a codeword".into()));
            }
            if !pattern.iter().any(|&b| b) {
                return Err(EnergyError::InvalidCodebook(
                    "a codeword needs at least one received frame".into(),
                ));
            }
            match pattern_len {
                None => pattern_len = Some(pattern.len()),
                Some(l) if l != pattern.len() => {
                    return Err(EnergyError::InvalidCodebook("codewords differ in length".into()))
                }
                _ => {}
            }
            if patterns.insert(pattern, role).is_some() {
                return Err(EnergyError::InvalidCodebook("duplicate codeword".into()));
            }
        }
        let covers = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(&x, &y)| x || !y);
        for (a, ra) in &patterns {
            for (b, rb) in &patterns {
                if a != b && covers(a, b) {
                    return Err(EnergyError::InvalidCodebook(format!(
                        "{rb} codeword is {ra} with frames missing"
                    )));
                }
            }
        }
        let pattern_len =
            pattern_len.ok_or_else(|| EnergyError::InvalidCodebook("codebook is empty".into()))?;
        Ok(Self {
            patterns,
            pattern_len,
        })
    }

    pub fn pattern_len(&self) -> usize {
        self.pattern_len
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[bool], NodeRole)> + '_ {
        self.patterns.iter().map(|(p, r)| (p.as_slice(), *r))
    }
}

impl Default for WakeupCodebook {
    /// Four frames, two hits per codeword.
    fn default() -> Self {
        Self::new([
            (vec![true, true, false, false], NodeRole::Localize),
            (vec![true, false, true, false], NodeRole::VirtualAnchor),
            (vec![true, false, false, true], NodeRole::Relay),
            (vec![false, true, true, false], NodeRole::Application),
        ])
        .expect("default codebook is well formed")
    }
}

pub fn decode_wakeup(frames: &[bool], codebook: &WakeupCodebook) -> Result<NodeRole, EnergyError> {
    if frames.len() > codebook.pattern_len {
        return Err(EnergyError::SequenceTooLong {
            got: frames.len(),
            max: codebook.pattern_len,
        });
    }
    Ok(codebook
        .patterns
        .get(frames)
        .copied()
        .unwrap_or(NodeRole::Asleep))
}

/// Decodes a wake-up sequence and applies it; nodes below the turn-on
/// threshold stay asleep whatever they received.
pub fn apply_wakeup(
    state: EnergyState,
    frames: &[bool],
    codebook: &WakeupCodebook,
) -> Result<EnergyState, EnergyError> {
    let role = decode_wakeup(frames, codebook)?;
    Ok(state.wake(role))
}
