//! PID rudder controller with base-angle selection and output clipping.
//!
//! The control law is u(t) = Kp·e + Ki·∫e + Kd·de/dt on the heading
//! error, and the rudder command is `base − proportion·u`, clamped to
//! the mechanical limit. Three base angles exist; the base opposite to
//! the turn direction is selected while a tack maneuver is in progress
//! so the rudder starts from its most effective side.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::normalize_deg;

#[derive(Debug, Error, PartialEq)]
pub enum HelmError {
    #[error("dt must be positive, got {0}")]
    NonPositiveDt(f64),
}

/// PID gains plus the output scale applied in the rudder mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Linear amplification of u before the rudder clamp; large values
    /// let big maneuvers saturate the rudder at its limit.
    pub pid_proportion: f64,
    /// Anti-windup clamp on the error integral (deg·s).
    pub integral_limit: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 0.2,
            ki: 0.1,
            kd: 0.01,
            pid_proportion: 2.5,
            integral_limit: 8.0,
        }
    }
}

/// Rudder base angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RudderBases {
    pub left: f64,
    pub middle: f64,
    pub right: f64,
}

impl Default for RudderBases {
    fn default() -> Self {
        Self {
            left: -30.0,
            middle: 0.0,
            right: 30.0,
        }
    }
}

/// Which base angle the rudder command is tuned around.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseMode {
    Left,
    Middle,
    Right,
}

/// Maneuver the boat is currently performing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Maneuver {
    RightTack,
    LeftTack,
    None,
}

/// Shortest signed angular difference `setting − heading` in degrees,
/// normalized into (-180, 180].
pub fn heading_error(setting_deg: f64, heading_deg: f64) -> f64 {
    normalize_deg(setting_deg - heading_deg)
}

/// Base selection: the rudder is tuned on the left base during a right
/// tack, on the right base during a left tack, and on the middle base
/// otherwise.
pub fn select_base(maneuver: Maneuver) -> BaseMode {
    match maneuver {
        Maneuver::RightTack => BaseMode::Left,
        Maneuver::LeftTack => BaseMode::Right,
        Maneuver::None => BaseMode::Middle,
    }
}

/// Discrete PID state: rectangular integral, backward-difference
/// derivative (zero on the first step after a reset).
#[derive(Debug, Clone)]
pub struct PidController {
    pub gains: PidGains,
    pub bases: RudderBases,
    /// Mechanical rudder limit in degrees (output clamped to ±clip_limit).
    pub clip_limit: f64,
    integral: f64,
    prev_error: Option<f64>,
}

impl PidController {
    pub fn new(gains: PidGains, bases: RudderBases, clip_limit: f64) -> Self {
        Self {
            gains,
            bases,
            clip_limit,
            integral: 0.0,
            prev_error: None,
        }
    }

    /// Accumulated error integral (deg·s); always within ±integral_limit.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Advance the controller by one sample and return u(t).
    pub fn step(&mut self, error_deg: f64, dt: f64) -> Result<f64, HelmError> {
        if !(dt > 0.0) {
            return Err(HelmError::NonPositiveDt(dt));
        }
        let lim = self.gains.integral_limit;
        self.integral = (self.integral + error_deg * dt).clamp(-lim, lim);
        let derivative = match self.prev_error {
            Some(prev) => (error_deg - prev) / dt,
            None => 0.0,
        };
        self.prev_error = Some(error_deg);
        Ok(self.gains.kp * error_deg + self.gains.ki * self.integral + self.gains.kd * derivative)
    }

    /// Map u(t) to a rudder angle around the selected base, clamped to
    /// the mechanical limit.
    pub fn rudder(&self, u: f64, base_mode: BaseMode) -> f64 {
        let base = match base_mode {
            BaseMode::Left => self.bases.left,
            BaseMode::Middle => self.bases.middle,
            BaseMode::Right => self.bases.right,
        };
        (base - self.gains.pid_proportion * u).clamp(-self.clip_limit, self.clip_limit)
    }

    /// Zero the integral and forget the previous error.
    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn paper_gains() -> PidGains {
        PidGains {
            kp: 0.2,
            ki: 0.1,
            kd: 0.01,
            pid_proportion: 1.0,
            integral_limit: 200.0,
        }
    }

    fn bases() -> RudderBases {
        RudderBases {
            left: -30.0,
            middle: 0.0,
            right: 30.0,
        }
    }

    #[test]
    fn heading_error_wraps() {
        assert_eq!(heading_error(90.0, 0.0), 90.0);
        assert_eq!(heading_error(-170.0, 170.0), 20.0);
    }

    proptest! {
        #[test]
        fn heading_error_matches_wrap_oracle(s in -720.0..720.0f64, h in -720.0..720.0f64) {
            let got = heading_error(s, h);
            // Brute force: the unique candidate s−h+360k inside (−180, 180].
            let mut want = f64::NAN;
            for k in -4..=4i64 {
                let cand = s - h + 360.0 * k as f64;
                if cand > -180.0 && cand <= 180.0 {
                    want = cand;
                }
            }
            prop_assert!((got - want).abs() < 1e-9);
        }

        #[test]
        fn proportional_term_is_homogeneous(e in -100.0..100.0f64, lambda in 0.1..5.0f64) {
            let gains = PidGains { ki: 0.0, kd: 0.0, ..paper_gains() };
            let mut a = PidController::new(gains, bases(), 40.0);
            let mut b = PidController::new(gains, bases(), 40.0);
            let ua = a.step(e, 0.1).unwrap();
            let ub = b.step(lambda * e, 0.1).unwrap();
            prop_assert!((ub - lambda * ua).abs() < 1e-9);
        }

        #[test]
        fn rudder_always_within_clip(u in -1e7..1e7f64) {
            let ctrl = PidController::new(paper_gains(), bases(), 40.0);
            for mode in [BaseMode::Left, BaseMode::Middle, BaseMode::Right] {
                let r = ctrl.rudder(u, mode);
                prop_assert!((-40.0..=40.0).contains(&r));
            }
        }
    }

    #[test]
    fn proportional_only_constant_error() {
        let gains = PidGains {
            ki: 0.0,
            kd: 0.0,
            ..paper_gains()
        };
        let mut ctrl = PidController::new(gains, bases(), 40.0);
        for _ in 0..10 {
            let u = ctrl.step(5.0, 0.1).unwrap();
            assert!((u - 0.2 * 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_error_gives_zero_u_and_base_rudder() {
        let mut ctrl = PidController::new(paper_gains(), bases(), 40.0);
        for _ in 0..100 {
            let u = ctrl.step(0.0, 0.05).unwrap();
            assert_eq!(u, 0.0);
            assert_eq!(ctrl.rudder(u, BaseMode::Middle), 0.0);
            assert_eq!(ctrl.rudder(u, BaseMode::Left), -30.0);
        }
    }

    #[test]
    fn constant_error_matches_closed_form_sum() {
        // With constant error c the rectangular integral after n steps is
        // c·n·dt and the derivative vanishes after the first step, so
        // u_n = kp·c + ki·c·n·dt exactly.
        let c = 10.0;
        let dt = 0.1;
        let mut ctrl = PidController::new(paper_gains(), bases(), 40.0);
        for n in 1..=50 {
            let u = ctrl.step(c, dt).unwrap();
            let want = 0.2 * c + 0.1 * c * (n as f64) * dt;
            assert!(
                (u - want).abs() < 1e-9,
                "step {n}: u={u}, closed form={want}"
            );
        }
    }

    #[test]
    fn rudder_mapping_examples() {
        let mut gains = paper_gains();
        let ctrl = PidController::new(gains, bases(), 40.0);
        assert_eq!(ctrl.rudder(10.0, BaseMode::Middle), -10.0);
        assert_eq!(ctrl.rudder(1e6, BaseMode::Middle), -40.0);
        gains.pid_proportion = 0.5;
        let ctrl = PidController::new(gains, bases(), 40.0);
        assert_eq!(ctrl.rudder(-5.0, BaseMode::Left), -27.5);
    }

    #[test]
    fn base_selection() {
        assert_eq!(select_base(Maneuver::RightTack), BaseMode::Left);
        assert_eq!(select_base(Maneuver::LeftTack), BaseMode::Right);
        assert_eq!(select_base(Maneuver::None), BaseMode::Middle);
    }

    #[test]
    fn integral_never_exceeds_limit() {
        let mut ctrl = PidController::new(paper_gains(), bases(), 40.0);
        for _ in 0..100_000 {
            ctrl.step(1000.0, 0.05).unwrap();
            assert!(ctrl.integral().abs() <= 200.0);
        }
    }

    #[test]
    fn non_positive_dt_rejected() {
        let mut ctrl = PidController::new(paper_gains(), bases(), 40.0);
        assert_eq!(ctrl.step(1.0, 0.0), Err(HelmError::NonPositiveDt(0.0)));
        assert!(ctrl.step(1.0, -0.1).is_err());
    }

    #[test]
    fn reset_behaves_like_a_fresh_controller() {
        let mut used = PidController::new(paper_gains(), bases(), 40.0);
        for i in 0..20 {
            used.step(3.0 * (i as f64 % 7.0) - 9.0, 0.05).unwrap();
        }
        used.reset();
        used.reset(); // idempotent
        let mut fresh = PidController::new(paper_gains(), bases(), 40.0);
        let stream = [4.0, -2.5, 7.0, 0.0, 13.0, -20.0];
        for e in stream {
            let a = used.step(e, 0.05).unwrap();
            let b = fresh.step(e, 0.05).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn first_step_after_reset_has_no_derivative_kick() {
        let gains = PidGains {
            kp: 0.0,
            ki: 0.0,
            kd: 1.0,
            ..paper_gains()
        };
        let mut ctrl = PidController::new(gains, bases(), 40.0);
        let u = ctrl.step(50.0, 0.05).unwrap();
        assert_eq!(u, 0.0);
    }
}
