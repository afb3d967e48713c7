//! Deterministic planar simulator and control stack for a small hybrid
//! wind/electric autonomous sailboat.
//!
//! The crate models an upwind cruise inside a rectangular test arena:
//! a PID rudder controller ([`helm`]), a sail forward-force model and
//! force-distribution map ([`sail`], [`forcemap`]), a bar-triggered
//! tacking mission state machine with motor assist ([`mission`]),
//! 3-DOF boat dynamics in a gusty wind field ([`sim`]), electrical
//! power/energy accounting with an energy-time line fit ([`energy`]),
//! and a heading-angle sweep harness ([`experiment`]).
//!
//! Everything is seeded and deterministic: identical configuration and
//! seed reproduce bit-identical trajectories and ledgers.

pub mod angles;
pub mod config;
pub mod energy;
pub mod experiment;
pub mod forcemap;
pub mod helm;
pub mod mission;
pub mod sail;
pub mod sim;

pub use config::RunConfig;
pub use energy::{EnergyLedger, EnergySample, LineFit, PowerModel};
pub use experiment::{CruiseResult, SweepReport, SweepSpec};
pub use forcemap::{SailForceMap, TackSide};
pub use helm::{PidController, PidGains, RudderBases};
pub use mission::{MissionConfig, MissionState, Phase};
pub use sail::SensorForce;
pub use sim::{ActuatorCommand, Arena, BoatState, Simulator, VesselParams, WindField};
