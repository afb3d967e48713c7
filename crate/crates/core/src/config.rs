//! Run configuration: one TOML document gathering every subsystem's
//! parameters. Missing keys take the documented defaults; unknown keys
//! are rejected. `RunConfig::validate` re-checks every domain invariant
//! and names the offending field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::PowerModel;
use crate::helm::{PidGains, RudderBases};
use crate::mission::MissionConfig;
use crate::sim::{Arena, VesselParams, WindField};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {msg}")]
    Invariant { field: &'static str, msg: String },
}

/// Rudder base angles and the mechanical clip limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RudderSection {
    pub left_base_deg: f64,
    pub middle_base_deg: f64,
    pub right_base_deg: f64,
    pub clip_limit_deg: f64,
}

impl Default for RudderSection {
    fn default() -> Self {
        Self {
            left_base_deg: -30.0,
            middle_base_deg: 0.0,
            right_base_deg: 30.0,
            clip_limit_deg: 40.0,
        }
    }
}

impl RudderSection {
    pub fn bases(&self) -> RudderBases {
        RudderBases {
            left: self.left_base_deg,
            middle: self.middle_base_deg,
            right: self.right_base_deg,
        }
    }
}

/// Sail model parameters; CSV paths override the analytic model when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SailSection {
    /// N·s²/m² in the flat-plate normal-force law.
    pub sail_coeff: f64,
    pub theta_step_deg: f64,
    pub phi_step_deg: f64,
    /// Sail servo slew rate (deg/s); the commanded Φ chases the optimal
    /// trim at this bounded rate, so tacks and jibes carry a retrim cost.
    pub slew_rate_deg_per_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right_map_csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left_map_csv: Option<String>,
}

impl Default for SailSection {
    fn default() -> Self {
        Self {
            sail_coeff: 0.8,
            theta_step_deg: 1.0,
            phi_step_deg: 1.0,
            slew_rate_deg_per_s: 90.0,
            right_map_csv: None,
            left_map_csv: None,
        }
    }
}

/// Integration step, run timeout, release speed and base RNG seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub timeout_s: f64,
    /// Surge speed the boat is released with at the start point (m/s).
    pub release_speed: f64,
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 0.025,
            timeout_s: 1200.0,
            release_speed: 0.9,
            seed: 1,
        }
    }
}

/// Complete configuration for a cruise or sweep run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub arena: Arena,
    pub wind: WindField,
    pub vessel: VesselParams,
    pub pid: PidGains,
    pub rudder: RudderSection,
    pub mission: MissionConfig,
    pub power: PowerModel,
    pub sail: SailSection,
    pub sim: SimSection,
}

fn fail(field: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invariant {
        field,
        msg: msg.into(),
    }
}

impl RunConfig {
    /// Parse from TOML and validate all invariants.
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering; parsing it back yields an equal config
    /// and re-dumping yields identical bytes.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = self;
        if !(c.arena.width > 0.0) {
            return Err(fail("arena.width", "must be > 0"));
        }
        if !(c.arena.height > 0.0) {
            return Err(fail("arena.height", "must be > 0"));
        }
        if !(c.wind.mean_speed > 0.0) {
            return Err(fail("wind.mean_speed", "must be > 0"));
        }
        if !(c.wind.gust_amplitude >= 0.0) {
            return Err(fail("wind.gust_amplitude", "must be >= 0"));
        }
        if !(c.wind.mean_speed - c.wind.gust_amplitude > 0.0) {
            return Err(fail(
                "wind.gust_amplitude",
                "mean_speed - gust_amplitude must stay > 0",
            ));
        }
        if !(c.wind.heading_noise_sigma >= 0.0) {
            return Err(fail("wind.heading_noise_sigma", "must be >= 0"));
        }
        if !(c.vessel.mass > 0.0) {
            return Err(fail("vessel.mass", "must be > 0"));
        }
        for (field, v) in [
            ("vessel.drag_coeff", c.vessel.drag_coeff),
            ("vessel.turn_rate_gain", c.vessel.turn_rate_gain),
            ("vessel.motor_thrust", c.vessel.motor_thrust),
            ("vessel.motor_yaw_rate", c.vessel.motor_yaw_rate),
            ("vessel.leeway_coeff", c.vessel.leeway_coeff),
        ] {
            if !(v >= 0.0) {
                return Err(fail(field, "must be >= 0"));
            }
        }
        if !(c.vessel.no_go_half_angle_deg > 0.0 && c.vessel.no_go_half_angle_deg < 90.0) {
            return Err(fail("vessel.no_go_half_angle_deg", "must be in (0, 90)"));
        }
        for (field, v) in [
            ("pid.kp", c.pid.kp),
            ("pid.ki", c.pid.ki),
            ("pid.kd", c.pid.kd),
            ("pid.pid_proportion", c.pid.pid_proportion),
        ] {
            if !v.is_finite() {
                return Err(fail(field, "must be finite"));
            }
        }
        if !(c.pid.integral_limit >= 0.0) {
            return Err(fail("pid.integral_limit", "must be >= 0"));
        }
        if !(c.rudder.clip_limit_deg > 0.0) {
            return Err(fail("rudder.clip_limit_deg", "must be > 0"));
        }
        for (field, v) in [
            ("rudder.left_base_deg", c.rudder.left_base_deg),
            ("rudder.middle_base_deg", c.rudder.middle_base_deg),
            ("rudder.right_base_deg", c.rudder.right_base_deg),
        ] {
            if !(-40.0..=40.0).contains(&v) {
                return Err(fail(field, "must be within [-40, 40] degrees"));
            }
        }
        let m = &c.mission;
        if !(m.left_bar_x < m.middle_bar_x && m.middle_bar_x < m.right_bar_x) {
            return Err(fail(
                "mission.middle_bar_x",
                "bars must satisfy left_bar_x < middle_bar_x < right_bar_x",
            ));
        }
        if !(m.lower_bar_y < m.upper_bar_y) {
            return Err(fail(
                "mission.upper_bar_y",
                "bars must satisfy lower_bar_y < upper_bar_y",
            ));
        }
        if !(m.start_radius > 0.0) {
            return Err(fail("mission.start_radius", "must be > 0"));
        }
        if !(m.theta_setting_deg > 0.0 && m.theta_setting_deg < 90.0) {
            return Err(fail("mission.theta_setting_deg", "must be in (0, 90)"));
        }
        if !(m.boundary_angle_deg >= 0.0) {
            return Err(fail("mission.boundary_angle_deg", "must be >= 0"));
        }
        if !(c.power.base_power_w > 0.0) {
            return Err(fail("power.base_power_w", "must be > 0"));
        }
        if !(c.power.motor_power_w >= 0.0) {
            return Err(fail("power.motor_power_w", "must be >= 0"));
        }
        if !(7.8..=8.4).contains(&c.power.battery_voltage) {
            return Err(fail("power.battery_voltage", "must be within [7.8, 8.4]"));
        }
        if !(c.sail.sail_coeff > 0.0) {
            return Err(fail("sail.sail_coeff", "must be > 0"));
        }
        if !(c.sail.slew_rate_deg_per_s > 0.0) {
            return Err(fail("sail.slew_rate_deg_per_s", "must be > 0"));
        }
        for (field, v) in [
            ("sail.theta_step_deg", c.sail.theta_step_deg),
            ("sail.phi_step_deg", c.sail.phi_step_deg),
        ] {
            if !(v > 0.0) || (360.0 / v).fract().abs() > 1e-9 {
                return Err(fail(field, "must be positive and divide 360 evenly"));
            }
        }
        if !(c.sim.dt > 0.0 && c.sim.dt <= 0.5) {
            return Err(fail("sim.dt", "must be in (0, 0.5]"));
        }
        if !(c.sim.timeout_s > 0.0) {
            return Err(fail("sim.timeout_s", "must be > 0"));
        }
        if !(c.sim.release_speed >= 0.0) {
            return Err(fail("sim.release_speed", "must be >= 0"));
        }
        Ok(())
    }
}
