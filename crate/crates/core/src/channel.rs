//! In-body THz link model: log-distance path loss with linear tissue
//! absorption, two-way time-of-flight ranging noise and TS-OOK timing.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("distance must be positive, got {0} mm")]
    NonPositiveDistance(f64),
    #[error("packet has {ones} ones but only {bits} bits")]
    TooManyOnes { bits: u64, ones: u64 },
    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Loss at `ref_distance`, dB.
    pub ref_loss_db: f64,
    /// mm
    pub ref_distance: f64,
    pub spreading_exponent: f64,
    pub absorption_db_per_mm: f64,
    /// Maximum tolerable loss, dB.
    pub link_budget_db: f64,
}

impl Default for ChannelParams {
    /// Calibrated so that the communication range is 20 mm.
    fn default() -> Self {
        Self {
            ref_loss_db: 40.0,
            ref_distance: 1.0,
            spreading_exponent: 2.0,
            absorption_db_per_mm: 1.0,
            link_budget_db: 86.0206,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let mut bad = Vec::new();
        if !self.ref_loss_db.is_finite() {
            bad.push("ref_loss_db must be finite");
        }
        if !(self.ref_distance.is_finite() && self.ref_distance > 0.0) {
            bad.push("ref_distance must be positive");
        }
        if !(self.spreading_exponent.is_finite() && self.spreading_exponent >= 0.0) {
            bad.push("spreading_exponent must be non-negative");
        }
        if !(self.absorption_db_per_mm.is_finite() && self.absorption_db_per_mm >= 0.0) {
            bad.push("absorption_db_per_mm must be non-negative");
        }
        if self.link_budget_db.is_nan() {
            bad.push("link_budget_db must not be NaN");
        }
        if self.spreading_exponent == 0.0 && self.absorption_db_per_mm == 0.0 {
            bad.push("path loss must grow with distance (exponent or absorption > 0)");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(ChannelError::InvalidParams(bad.join("; ")))
        }
    }
}

pub fn path_loss(d: f64, params: &ChannelParams) -> Result<f64, ChannelError> {
    if !(d > 0.0) {
        return Err(ChannelError::NonPositiveDistance(d));
    }
    Ok(path_loss_unchecked(d, params))
}

pub(crate) fn path_loss_unchecked(d: f64, p: &ChannelParams) -> f64 {
    p.ref_loss_db
        + 10.0 * p.spreading_exponent * (d / p.ref_distance).log10()
        + p.absorption_db_per_mm * d
}

/// Distance at which the path loss uses up the whole link budget.
///
/// Searched by bisection above `ref_distance`; returns 0 when the budget
/// does not even cover the reference loss.
pub fn comm_range(params: &ChannelParams) -> f64 {
    max_distance_for_loss(params.link_budget_db, params)
}

/// Largest `d ≥ ref_distance` with `path_loss(d) ≤ max_loss_db`.
pub fn max_distance_for_loss(max_loss_db: f64, params: &ChannelParams) -> f64 {
    let f = |d: f64| path_loss_unchecked(d, params) - max_loss_db;
    let mut lo = params.ref_distance;
    let f_lo = f(lo);
    if f_lo > 0.0 {
        return 0.0;
    }
    if f_lo == 0.0 {
        return lo;
    }
    if max_loss_db == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut hi = lo * 2.0;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    // stop once the bracket no longer shrinks or is far below 1e-6 mm
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-10 * hi.max(1.0) {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangingModel {
    /// Standard deviation of the range error, mm.
    pub sigma_r: f64,
    /// Informational only; the noise is parameterized by `sigma_r` directly.
    pub bandwidth_hz: f64,
}

impl Default for RangingModel {
    fn default() -> Self {
        Self {
            sigma_r: 1.0,
            bandwidth_hz: 1e12,
        }
    }
}

/// Noisy two-way ToF range: `max(0, d + ε)` with `ε ~ N(0, σ_r²)`.
pub fn measure_range<R: Rng + ?Sized>(true_d: f64, model: &RangingModel, rng: &mut R) -> f64 {
    if model.sigma_r <= 0.0 {
        return true_d.max(0.0);
    }
    let noise = Normal::new(0.0, model.sigma_r)
        .expect("sigma_r is finite and positive")
        .sample(rng);
    (true_d + noise).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsOokParams {
    /// s
    pub pulse_duration: f64,
    /// β divided by the pulse duration.
    pub beta_ratio: f64,
    /// pJ per transmitted pulse.
    pub e_tx_pulse: f64,
    /// pJ per sampled bit slot.
    pub e_rx_pulse: f64,
    /// pW
    pub p_idle: f64,
}

impl Default for TsOokParams {
    fn default() -> Self {
        Self {
            pulse_duration: 1e-13,
            beta_ratio: 1000.0,
            e_tx_pulse: 1.0,
            e_rx_pulse: 0.5,
            p_idle: 100.0,
        }
    }
}

impl TsOokParams {
    /// Symbol spacing β in seconds.
    pub fn beta(&self) -> f64 {
        self.beta_ratio * self.pulse_duration
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let mut bad: Vec<String> = Vec::new();
        if !(self.pulse_duration.is_finite() && self.pulse_duration > 0.0) {
            bad.push("pulse_duration must be positive".into());
        }
        if !(self.beta_ratio.is_finite() && self.beta_ratio >= 100.0) {
            bad.push("beta_ratio must be at least 100".into());
        }
        for (name, v) in [
            ("e_tx_pulse", self.e_tx_pulse),
            ("e_rx_pulse", self.e_rx_pulse),
            ("p_idle", self.p_idle),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                bad.push(format!("{name} must be non-negative"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(ChannelError::InvalidParams(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketCost {
    /// s
    pub duration: f64,
    /// pJ
    pub energy: f64,
}

/// Transmit-side cost of a TS-OOK packet: one pulse per logical one,
/// silence for zeros, idle power over the whole `bits · β` airtime.
pub fn tsook_packet_cost(bits: u64, ones: u64, params: &TsOokParams) -> Result<PacketCost, ChannelError> {
    if ones > bits {
        return Err(ChannelError::TooManyOnes { bits, ones });
    }
    let duration = bits as f64 * params.beta();
    let energy = ones as f64 * params.e_tx_pulse + duration * params.p_idle;
    Ok(PacketCost { duration, energy })
}

/// Receive-side cost: the receiver samples every bit slot.
pub fn tsook_receive_cost(bits: u64, params: &TsOokParams) -> PacketCost {
    let duration = bits as f64 * params.beta();
    PacketCost {
        duration,
        energy: bits as f64 * params.e_rx_pulse + duration * params.p_idle,
    }
}
