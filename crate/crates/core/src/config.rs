//! Scenario configuration: one flat TOML table of scalar keys.
//!
//! Every key is optional; omitted keys take the defaults below. Region and
//! density use centimeters to match the way the experiment is usually
//! described, everything else uses the internal units (mm, s, pJ, pW, dB).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelParams, RangingModel, TsOokParams};
use crate::energy::{EnergyState, HarvestProfile};
use crate::geometry::{GeometryError, Point, Region};
use crate::localization::Mode;
use crate::routing::RoutingParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl ConfigError {
    pub fn is_validation(&self) -> bool {
        matches!(self, ConfigError::Invalid(_) | ConfigError::Parse { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub radius_cm: f64,
    pub thickness_cm: f64,
    pub density_per_cm3: f64,
    pub comm_range_cm: f64,
    /// Per-iteration localization accuracy of the approximate model, mm.
    pub sigma_mm: f64,
    pub mode: Mode,
    pub seed: u64,
    pub trials: u32,

    // full mode
    pub anchor_count: usize,
    pub anchors_per_fix: usize,
    pub sigma_r_mm: f64,
    pub bandwidth_hz: f64,

    // channel
    pub channel_ref_loss_db: f64,
    pub channel_ref_distance_mm: f64,
    pub channel_spreading_exponent: f64,
    pub channel_absorption_db_per_mm: f64,
    pub channel_link_budget_db: f64,

    // TS-OOK
    pub tsook_pulse_duration_s: f64,
    pub tsook_beta_ratio: f64,
    pub tsook_e_tx_pulse_pj: f64,
    pub tsook_e_rx_pulse_pj: f64,
    pub tsook_p_idle_pw: f64,

    // energy
    pub energy_capacity_pj: f64,
    pub energy_turn_on_pj: f64,
    pub energy_initial_pj: f64,
    pub harvest_base_pw: f64,
    pub harvest_hotspot_x_mm: f64,
    pub harvest_hotspot_y_mm: f64,
    pub harvest_hotspot_gain: f64,
    pub harvest_hotspot_radius_mm: f64,
    /// Harvesting time simulated before a routing snapshot, s.
    pub harvest_duration_s: f64,

    // routing and wake-up
    pub routing_k_sigma: f64,
    pub routing_d_floor_mm: f64,
    pub routing_snr_threshold_db: f64,
    pub routing_low_energy_pj: f64,
    pub routing_energy_penalty_db: f64,
    pub wake_half_width_deg: f64,
    pub wake_min_half_width_deg: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let ch = ChannelParams::default();
        let ts = TsOokParams::default();
        let hp = HarvestProfile::default();
        let rp = RoutingParams::default();
        Self {
            radius_cm: 30.0,
            thickness_cm: 1.0,
            density_per_cm3: 10.0,
            comm_range_cm: 2.0,
            sigma_mm: 1.0,
            mode: Mode::Approximate,
            seed: 1,
            trials: 20,
            anchor_count: 64,
            anchors_per_fix: 3,
            sigma_r_mm: 1.0,
            bandwidth_hz: 1e12,
            channel_ref_loss_db: ch.ref_loss_db,
            channel_ref_distance_mm: ch.ref_distance,
            channel_spreading_exponent: ch.spreading_exponent,
            channel_absorption_db_per_mm: ch.absorption_db_per_mm,
            channel_link_budget_db: ch.link_budget_db,
            tsook_pulse_duration_s: ts.pulse_duration,
            tsook_beta_ratio: ts.beta_ratio,
            tsook_e_tx_pulse_pj: ts.e_tx_pulse,
            tsook_e_rx_pulse_pj: ts.e_rx_pulse,
            tsook_p_idle_pw: ts.p_idle,
            energy_capacity_pj: 100.0,
            energy_turn_on_pj: 10.0,
            energy_initial_pj: 0.0,
            harvest_base_pw: hp.base_rate,
            harvest_hotspot_x_mm: hp.hotspot_center.x,
            harvest_hotspot_y_mm: hp.hotspot_center.y,
            harvest_hotspot_gain: hp.hotspot_gain,
            harvest_hotspot_radius_mm: hp.hotspot_radius,
            harvest_duration_s: 10.0,
            routing_k_sigma: rp.k_sigma,
            routing_d_floor_mm: rp.d_floor,
            routing_snr_threshold_db: rp.snr_threshold_db,
            routing_low_energy_pj: rp.low_energy_threshold,
            routing_energy_penalty_db: rp.energy_penalty_db,
            wake_half_width_deg: 10.0,
            wake_min_half_width_deg: 1.0,
        }
    }
}

fn positive(name: &str, v: f64, bad: &mut Vec<String>) {
    if !(v.is_finite() && v > 0.0) {
        bad.push(format!("{name} must be positive (got {v})"));
    }
}

fn non_negative(name: &str, v: f64, bad: &mut Vec<String>) {
    if !(v.is_finite() && v >= 0.0) {
        bad.push(format!("{name} must be non-negative (got {v})"));
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::from_toml_str(&text).map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat scalar table always serializes")
    }

    /// Collects every offending field rather than stopping at the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut bad = Vec::new();
        positive("radius_cm", self.radius_cm, &mut bad);
        positive("thickness_cm", self.thickness_cm, &mut bad);
        non_negative("density_per_cm3", self.density_per_cm3, &mut bad);
        non_negative("comm_range_cm", self.comm_range_cm, &mut bad);
        non_negative("sigma_mm", self.sigma_mm, &mut bad);
        if self.trials == 0 {
            bad.push("trials must be at least 1".into());
        }
        if self.density_per_cm3.is_finite() && self.radius_cm.is_finite() && self.thickness_cm.is_finite() {
            let count = std::f64::consts::PI * self.radius_cm.powi(2) * self.thickness_cm * self.density_per_cm3;
            if count > u32::MAX as f64 {
                bad.push(format!("density_per_cm3 yields {count:.0} nodes, above the supported maximum"));
            }
        }
        if self.mode == Mode::Full {
            if self.anchor_count < 3 {
                bad.push(format!("anchor_count must be at least 3 in full mode (got {})", self.anchor_count));
            }
            if self.anchors_per_fix < 3 {
                bad.push(format!(
                    "anchors_per_fix must be at least 3 in full mode (got {})",
                    self.anchors_per_fix
                ));
            }
            if self.anchors_per_fix > self.anchor_count {
                bad.push("anchors_per_fix must not exceed anchor_count".into());
            }
            non_negative("sigma_r_mm", self.sigma_r_mm, &mut bad);
        }
        positive("bandwidth_hz", self.bandwidth_hz, &mut bad);

        if !self.channel_ref_loss_db.is_finite() {
            bad.push("channel_ref_loss_db must be finite".into());
        }
        positive("channel_ref_distance_mm", self.channel_ref_distance_mm, &mut bad);
        non_negative("channel_spreading_exponent", self.channel_spreading_exponent, &mut bad);
        non_negative("channel_absorption_db_per_mm", self.channel_absorption_db_per_mm, &mut bad);
        if self.channel_spreading_exponent == 0.0 && self.channel_absorption_db_per_mm == 0.0 {
            bad.push("channel_spreading_exponent and channel_absorption_db_per_mm cannot both be zero".into());
        }
        if !self.channel_link_budget_db.is_finite() {
            bad.push("channel_link_budget_db must be finite".into());
        }

        positive("tsook_pulse_duration_s", self.tsook_pulse_duration_s, &mut bad);
        if !(self.tsook_beta_ratio.is_finite() && self.tsook_beta_ratio >= 100.0) {
            bad.push(format!("tsook_beta_ratio must be at least 100 (got {})", self.tsook_beta_ratio));
        }
        non_negative("tsook_e_tx_pulse_pj", self.tsook_e_tx_pulse_pj, &mut bad);
        non_negative("tsook_e_rx_pulse_pj", self.tsook_e_rx_pulse_pj, &mut bad);
        non_negative("tsook_p_idle_pw", self.tsook_p_idle_pw, &mut bad);

        non_negative("energy_capacity_pj", self.energy_capacity_pj, &mut bad);
        non_negative("energy_turn_on_pj", self.energy_turn_on_pj, &mut bad);
        non_negative("energy_initial_pj", self.energy_initial_pj, &mut bad);
        non_negative("harvest_base_pw", self.harvest_base_pw, &mut bad);
        if !(self.harvest_hotspot_x_mm.is_finite() && self.harvest_hotspot_y_mm.is_finite()) {
            bad.push("harvest hotspot center must be finite".into());
        }
        if !(self.harvest_hotspot_gain.is_finite() && self.harvest_hotspot_gain >= 1.0) {
            bad.push(format!("harvest_hotspot_gain must be at least 1 (got {})", self.harvest_hotspot_gain));
        }
        non_negative("harvest_hotspot_radius_mm", self.harvest_hotspot_radius_mm, &mut bad);
        non_negative("harvest_duration_s", self.harvest_duration_s, &mut bad);

        non_negative("routing_k_sigma", self.routing_k_sigma, &mut bad);
        positive("routing_d_floor_mm", self.routing_d_floor_mm, &mut bad);
        if self.routing_snr_threshold_db.is_nan() {
            bad.push("routing_snr_threshold_db must not be NaN".into());
        }
        if self.routing_low_energy_pj.is_nan() {
            bad.push("routing_low_energy_pj must not be NaN".into());
        }
        non_negative("routing_energy_penalty_db", self.routing_energy_penalty_db, &mut bad);
        if !(self.wake_half_width_deg > 0.0 && self.wake_half_width_deg < 90.0) {
            bad.push(format!("wake_half_width_deg must be in (0, 90) (got {})", self.wake_half_width_deg));
        }
        if !(self.wake_min_half_width_deg > 0.0 && self.wake_min_half_width_deg <= self.wake_half_width_deg) {
            bad.push("wake_min_half_width_deg must be in (0, wake_half_width_deg]".into());
        }

        if bad.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(bad))
        }
    }

    pub fn region(&self) -> Result<Region, GeometryError> {
        Region::from_cm(self.radius_cm, self.thickness_cm)
    }

    pub fn comm_range_mm(&self) -> f64 {
        self.comm_range_cm * 10.0
    }

    pub fn ranging(&self) -> RangingModel {
        RangingModel {
            sigma_r: self.sigma_r_mm,
            bandwidth_hz: self.bandwidth_hz,
        }
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            ref_loss_db: self.channel_ref_loss_db,
            ref_distance: self.channel_ref_distance_mm,
            spreading_exponent: self.channel_spreading_exponent,
            absorption_db_per_mm: self.channel_absorption_db_per_mm,
            link_budget_db: self.channel_link_budget_db,
        }
    }

    pub fn tsook(&self) -> TsOokParams {
        TsOokParams {
            pulse_duration: self.tsook_pulse_duration_s,
            beta_ratio: self.tsook_beta_ratio,
            e_tx_pulse: self.tsook_e_tx_pulse_pj,
            e_rx_pulse: self.tsook_e_rx_pulse_pj,
            p_idle: self.tsook_p_idle_pw,
        }
    }

    pub fn harvest_profile(&self) -> HarvestProfile {
        HarvestProfile {
            base_rate: self.harvest_base_pw,
            hotspot_center: Point::new(self.harvest_hotspot_x_mm, self.harvest_hotspot_y_mm),
            hotspot_gain: self.harvest_hotspot_gain,
            hotspot_radius: self.harvest_hotspot_radius_mm,
        }
    }

    pub fn initial_energy(&self) -> EnergyState {
        EnergyState::new(self.energy_initial_pj, self.energy_capacity_pj, self.energy_turn_on_pj)
            .expect("validated energy parameters")
    }

    pub fn routing(&self) -> RoutingParams {
        RoutingParams {
            k_sigma: self.routing_k_sigma,
            d_floor: self.routing_d_floor_mm,
            snr_threshold_db: self.routing_snr_threshold_db,
            low_energy_threshold: self.routing_low_energy_pj,
            energy_penalty_db: self.routing_energy_penalty_db,
        }
    }
}
