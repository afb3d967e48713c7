//! Planar boat dynamics in a rectangular arena with a gusty wind field.
//!
//! The plant is a 3-DOF reduction: surge speed driven by sail/motor
//! force against quadratic drag, a kinematic yaw rate proportional to
//! rudder angle and speed, and a constant downwind leeway drift. Inside
//! the no-go cone around the upwind direction the sail produces no
//! force. Integration is explicit Euler at a fixed step; positions are
//! clamped to the arena with the speed zeroed at walls.
//!
//! Everything is seeded: gusts are a pure function of (seed, t) and the
//! heading noise is drawn from a counter-based stream, so identical
//! inputs reproduce bit-identical trajectories.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::{heading_unit, normalize_deg};
use crate::forcemap::{MapError, SailForceMap};
use crate::helm::heading_error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dt must be in (0, 0.5], got {0}")]
    InvalidDt(f64),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Planar pose and surge speed of the boat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoatState {
    pub x: f64,
    pub y: f64,
    /// Degrees, 0 = upwind (+y), positive clockwise, in (-180, 180].
    pub heading_deg: f64,
    /// Surge speed (m/s), never negative.
    pub speed: f64,
}

/// Unidirectional wind with smooth, seeded gusting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindField {
    /// Direction the wind blows from, as a heading in degrees.
    pub from_direction_deg: f64,
    pub mean_speed: f64,
    pub gust_amplitude: f64,
    /// Heading noise intensity, degrees per sqrt(second).
    pub heading_noise_sigma: f64,
    pub seed: u64,
}

impl Default for WindField {
    fn default() -> Self {
        Self {
            from_direction_deg: 0.0,
            mean_speed: 1.3,
            gust_amplitude: 0.1,
            heading_noise_sigma: 3.0,
            seed: 11,
        }
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

impl WindField {
    /// Wind speed at time `t`: the mean plus a smooth gust built from a
    /// small bank of seeded sinusoids. The output always stays inside
    /// [mean − amplitude, mean + amplitude].
    pub fn sample(&self, t: f64) -> f64 {
        if self.gust_amplitude == 0.0 {
            return self.mean_speed;
        }
        const WEIGHTS: [f64; 4] = [0.5, 0.25, 0.15, 0.1];
        let mut s = 0.0;
        for (i, w) in WEIGHTS.iter().enumerate() {
            let h1 = splitmix64(self.seed ^ (2 * i as u64 + 1));
            let h2 = splitmix64(self.seed ^ (2 * i as u64 + 2));
            let freq = 0.02 + 0.18 * unit_from_bits(h1); // Hz
            let phase = std::f64::consts::TAU * unit_from_bits(h2);
            s += w * (std::f64::consts::TAU * freq * t + phase).sin();
        }
        self.mean_speed + self.gust_amplitude * s.clamp(-1.0, 1.0)
    }
}

/// Arena extents in meters; the boat lives in [0, width] × [0, height].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            width: 8.0,
            height: 12.0,
        }
    }
}

/// Physical parameters of the hull, rudder and auxiliary motors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VesselParams {
    /// kg
    pub mass: f64,
    /// N·s²/m²
    pub drag_coeff: f64,
    /// Yaw response: deg/s of heading change per (deg rudder · m/s speed).
    /// Positive rudder angles steer the bow toward decreasing heading.
    pub turn_rate_gain: f64,
    /// Forward thrust per running motor (N).
    pub motor_thrust: f64,
    /// Extra yaw rate from single-sided motor assist (deg/s).
    pub motor_yaw_rate: f64,
    /// Downwind drift speed as a fraction of wind speed.
    pub leeway_coeff: f64,
    /// Half-angle of the no-go cone around upwind (deg).
    pub no_go_half_angle_deg: f64,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            mass: 0.601,
            drag_coeff: 0.112,
            turn_rate_gain: 9.0,
            motor_thrust: 0.03,
            motor_yaw_rate: 350.0,
            leeway_coeff: 0.12,
            no_go_half_angle_deg: 37.0,
        }
    }
}

/// Commands applied to the plant for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorCommand {
    pub rudder_deg: f64,
    pub sail_phi_deg: f64,
    pub motor_left: bool,
    pub motor_right: bool,
}

/// Virtual boundary lines used by the mission logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bar {
    LeftX,
    MiddleX,
    RightX,
    UpperY,
    LowerY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossDirection {
    Increasing,
    Decreasing,
}

/// True iff the relevant coordinate lies at or beyond `value` in the
/// stated direction (boundary inclusive).
pub fn crossed(state: &BoatState, bar: Bar, value: f64, direction: CrossDirection) -> bool {
    let coord = match bar {
        Bar::LeftX | Bar::MiddleX | Bar::RightX => state.x,
        Bar::UpperY | Bar::LowerY => state.y,
    };
    match direction {
        CrossDirection::Increasing => coord >= value,
        CrossDirection::Decreasing => coord <= value,
    }
}

/// One stateful simulation instance: owns the clock and the noise stream.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub params: VesselParams,
    pub wind: WindField,
    pub arena: Arena,
    rng: ChaCha8Rng,
    t: f64,
}

impl Simulator {
    pub fn new(params: VesselParams, wind: WindField, arena: Arena, noise_seed: u64) -> Self {
        Self {
            params,
            wind,
            arena,
            rng: ChaCha8Rng::seed_from_u64(noise_seed),
            t: 0.0,
        }
    }

    /// Simulation clock (s), advanced by `step`.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// Sail force for a heading, honoring the no-go cone.
    pub fn sail_force(
        &self,
        heading_deg: f64,
        sail_phi_deg: f64,
        map: &SailForceMap,
    ) -> Result<f64, MapError> {
        let to_wind = heading_error(heading_deg, self.wind.from_direction_deg).abs();
        if to_wind < self.params.no_go_half_angle_deg {
            Ok(0.0)
        } else {
            map.force_at(to_wind, sail_phi_deg)
        }
    }

    /// Advance the boat one explicit-Euler step of length `dt`.
    pub fn step(
        &mut self,
        state: &BoatState,
        cmd: &ActuatorCommand,
        map: &SailForceMap,
        dt: f64,
    ) -> Result<BoatState, SimError> {
        if !(dt > 0.0 && dt <= 0.5) {
            return Err(SimError::InvalidDt(dt));
        }
        let p = &self.params;

        let f_sail = self.sail_force(state.heading_deg, cmd.sail_phi_deg, map)?;
        let motors_on = cmd.motor_left as u8 + cmd.motor_right as u8;
        let f_total = f_sail + p.motor_thrust * motors_on as f64;
        let accel = (f_total - p.drag_coeff * state.speed * state.speed) / p.mass;

        let motor_yaw = match (cmd.motor_left, cmd.motor_right) {
            (true, false) => p.motor_yaw_rate,  // left motor pushes the bow clockwise
            (false, true) => -p.motor_yaw_rate, // right motor, counterclockwise
            _ => 0.0,
        };
        let heading_rate = -p.turn_rate_gain * cmd.rudder_deg * state.speed + motor_yaw;
        let noise: f64 = {
            let n: f64 = StandardNormal.sample(&mut self.rng);
            self.wind.heading_noise_sigma * dt.sqrt() * n
        };

        let wind_now = self.wind.sample(self.t);
        let (hx, hy) = heading_unit(state.heading_deg);
        let (wx, wy) = heading_unit(self.wind.from_direction_deg);
        let drift = p.leeway_coeff * wind_now;

        let mut next = BoatState {
            x: state.x + (hx * state.speed - wx * drift) * dt,
            y: state.y + (hy * state.speed - wy * drift) * dt,
            heading_deg: normalize_deg(state.heading_deg + heading_rate * dt + noise),
            speed: (state.speed + accel * dt).max(0.0),
        };

        // Wall contact: clamp to the arena and kill the speed on first
        // impact. A boat already pressed against a wall keeps its surge
        // dynamics so it can slide along and eventually sail off; the
        // constant leeway drift would otherwise pin it there forever.
        let cx = next.x.clamp(0.0, self.arena.width);
        let cy = next.y.clamp(0.0, self.arena.height);
        if cx != next.x || cy != next.y {
            let was_interior = state.x > 0.0
                && state.x < self.arena.width
                && state.y > 0.0
                && state.y < self.arena.height;
            next.x = cx;
            next.y = cy;
            if was_interior {
                next.speed = 0.0;
            }
        }
        self.t += dt;
        Ok(next)
    }
}
