//! Cruise mission state machine.
//!
//! The boat tacks upwind between the middle and right bars at ±θ, turns
//! onto a return bearing when it reaches the upper bar, turns toward the
//! start point when it reaches the left bar, and closes the loop inside
//! the start circle. Bar checks are priority ordered: the upper bar wins
//! over the tacking bars, so the return leg can begin from either tack.
//!
//! Any setting change that leaves the heading error above the boundary
//! angle arms single-sided motor assist; the assist disarms for good
//! once the error falls to the boundary, and inertia plus the rudder
//! finish the turn.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::normalize_deg;
use crate::helm::{heading_error, Maneuver};
use crate::sim::{crossed, Bar, BoatState, CrossDirection};

#[derive(Debug, Error, PartialEq)]
pub enum MissionError {
    #[error("bearing undefined for coincident points")]
    CoincidentPoints,
}

/// Geometry and parameters of the cruise course.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    pub left_bar_x: f64,
    pub middle_bar_x: f64,
    pub right_bar_x: f64,
    pub upper_bar_y: f64,
    pub lower_bar_y: f64,
    pub start_x: f64,
    pub start_y: f64,
    pub start_radius: f64,
    /// Close-hauled heading angle θ (deg); the swept parameter.
    pub theta_setting_deg: f64,
    /// Heading-error threshold below which motor assist switches off (deg).
    pub boundary_angle_deg: f64,
    pub loops_target: u32,
    /// Whether assist may also arm on the upper-bar and left-bar turns.
    pub assist_on_returns: bool,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            left_bar_x: 1.0,
            middle_bar_x: 4.0,
            right_bar_x: 7.0,
            upper_bar_y: 10.5,
            lower_bar_y: 1.0,
            start_x: 5.5,
            start_y: 1.5,
            start_radius: 0.5,
            theta_setting_deg: 40.0,
            boundary_angle_deg: 30.0,
            loops_target: 5,
            assist_on_returns: true,
        }
    }
}

impl MissionConfig {
    /// Midpoint of the left bar segment between the lower and upper bars.
    pub fn left_bar_midpoint(&self) -> (f64, f64) {
        (self.left_bar_x, 0.5 * (self.lower_bar_y + self.upper_bar_y))
    }
}

/// Cruise phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    TackRight,
    TackLeft,
    ReturnToLeft,
    ReturnToStart,
    Done,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::TackRight => "tack_right",
            Phase::TackLeft => "tack_left",
            Phase::ReturnToLeft => "return_to_left",
            Phase::ReturnToStart => "return_to_start",
            Phase::Done => "done",
        }
    }
}

/// Which motor the armed assist will run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssistSide {
    LeftMotor,
    RightMotor,
    None,
}

/// Motor command produced by the assist logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotorCommand {
    Off,
    LeftOn,
    RightOn,
}

/// Mission transition, reported for event logging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionEvent {
    /// Right bar reached while tacking right; setting flips to -θ.
    RightBarTack,
    /// Middle bar reached while tacking left; setting flips back to +θ.
    MiddleBarTack,
    /// Upper bar reached; setting turns toward the left-bar midpoint.
    UpperBarTurn,
    /// Left bar reached; setting turns toward the start point.
    LeftBarTurn,
    /// Start circle entered; one loop closed.
    LoopComplete,
}

impl MissionEvent {
    pub fn as_str(&self) -> &'static str {
        match self {
            MissionEvent::RightBarTack => "right_bar_tack",
            MissionEvent::MiddleBarTack => "middle_bar_tack",
            MissionEvent::UpperBarTurn => "upper_bar_turn",
            MissionEvent::LeftBarTurn => "left_bar_turn",
            MissionEvent::LoopComplete => "loop_complete",
        }
    }
}

/// Live mission state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionState {
    pub phase: Phase,
    pub setting_angle_deg: f64,
    pub tack_assist_active: bool,
    pub assist_side: AssistSide,
    /// True when the active assist window belongs to a tack (sign flip
    /// at the right or middle bar) rather than a return turn.
    pub assist_is_tack: bool,
    pub tack_count: u32,
    pub loop_count: u32,
}

/// Bearing of the vector `to − from` in the heading convention
/// (0° = +y, clockwise positive), degrees in (-180, 180].
pub fn bearing_to(from: (f64, f64), to: (f64, f64)) -> Result<f64, MissionError> {
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    if dx == 0.0 && dy == 0.0 {
        return Err(MissionError::CoincidentPoints);
    }
    Ok(normalize_deg(dx.atan2(dy).to_degrees()))
}

impl MissionState {
    /// Fresh mission: tacking right at +θ, counters zero, assist off.
    pub fn init(cfg: &MissionConfig) -> Self {
        Self {
            phase: Phase::TackRight,
            setting_angle_deg: cfg.theta_setting_deg,
            tack_assist_active: false,
            assist_side: AssistSide::None,
            assist_is_tack: false,
            tack_count: 0,
            loop_count: 0,
        }
    }

    fn arm_assist(&mut self, boat: &BoatState, cfg: &MissionConfig, is_tack: bool) {
        let err = heading_error(self.setting_angle_deg, boat.heading_deg);
        if err.abs() > cfg.boundary_angle_deg {
            self.tack_assist_active = true;
            self.assist_is_tack = is_tack;
            self.assist_side = if err > 0.0 {
                AssistSide::LeftMotor
            } else {
                AssistSide::RightMotor
            };
        }
    }

    /// Advance the state machine one tick against the current boat pose.
    /// At most one transition fires per call, checked in priority order.
    pub fn update(&mut self, boat: &BoatState, cfg: &MissionConfig) -> Option<MissionEvent> {
        if self.phase == Phase::Done {
            return None;
        }
        if self.loop_count >= cfg.loops_target {
            self.phase = Phase::Done;
            return None;
        }
        let theta = cfg.theta_setting_deg;
        match self.phase {
            Phase::TackRight | Phase::TackLeft
                if crossed(boat, Bar::UpperY, cfg.upper_bar_y, CrossDirection::Increasing) =>
            {
                self.phase = Phase::ReturnToLeft;
                self.setting_angle_deg =
                    bearing_to((boat.x, boat.y), cfg.left_bar_midpoint()).unwrap_or(180.0);
                if cfg.assist_on_returns {
                    self.arm_assist(boat, cfg, false);
                }
                Some(MissionEvent::UpperBarTurn)
            }
            Phase::TackRight
                if crossed(boat, Bar::RightX, cfg.right_bar_x, CrossDirection::Increasing) =>
            {
                self.phase = Phase::TackLeft;
                self.setting_angle_deg = -theta;
                self.tack_count += 1;
                self.arm_assist(boat, cfg, true);
                Some(MissionEvent::RightBarTack)
            }
            Phase::TackLeft
                if crossed(boat, Bar::MiddleX, cfg.middle_bar_x, CrossDirection::Decreasing) =>
            {
                self.phase = Phase::TackRight;
                self.setting_angle_deg = theta;
                self.tack_count += 1;
                self.arm_assist(boat, cfg, true);
                Some(MissionEvent::MiddleBarTack)
            }
            Phase::ReturnToLeft
                if crossed(boat, Bar::LeftX, cfg.left_bar_x, CrossDirection::Decreasing) =>
            {
                self.phase = Phase::ReturnToStart;
                self.setting_angle_deg =
                    bearing_to((boat.x, boat.y), (cfg.start_x, cfg.start_y)).unwrap_or(90.0);
                if cfg.assist_on_returns {
                    self.arm_assist(boat, cfg, false);
                }
                Some(MissionEvent::LeftBarTurn)
            }
            Phase::ReturnToStart => {
                let d = ((boat.x - cfg.start_x).powi(2) + (boat.y - cfg.start_y).powi(2)).sqrt();
                if d <= cfg.start_radius {
                    self.loop_count += 1;
                    if self.loop_count >= cfg.loops_target {
                        self.phase = Phase::Done;
                        self.tack_assist_active = false;
                        self.assist_side = AssistSide::None;
                    } else {
                        self.phase = Phase::TackRight;
                        self.setting_angle_deg = theta;
                        self.arm_assist(boat, cfg, false);
                    }
                    Some(MissionEvent::LoopComplete)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Motor command for the current tick. Disarms (and stays off until
    /// the next setting change) once the error reaches the boundary.
    pub fn assist_command(&mut self, boat: &BoatState, cfg: &MissionConfig) -> MotorCommand {
        if !self.tack_assist_active {
            return MotorCommand::Off;
        }
        let err = heading_error(self.setting_angle_deg, boat.heading_deg);
        if err.abs() <= cfg.boundary_angle_deg {
            self.tack_assist_active = false;
            self.assist_side = AssistSide::None;
            return MotorCommand::Off;
        }
        match self.assist_side {
            AssistSide::LeftMotor => MotorCommand::LeftOn,
            AssistSide::RightMotor => MotorCommand::RightOn,
            AssistSide::None => MotorCommand::Off,
        }
    }

    /// Maneuver classification for rudder base selection: an armed
    /// assist window turning clockwise (positive error) is a right
    /// tack, counterclockwise a left tack.
    pub fn maneuver(&self, boat: &BoatState) -> Maneuver {
        if !self.tack_assist_active {
            return Maneuver::None;
        }
        if heading_error(self.setting_angle_deg, boat.heading_deg) > 0.0 {
            Maneuver::RightTack
        } else {
            Maneuver::LeftTack
        }
    }
}
