//! Simulation library for graceful user following with a mobile balance
//! assistive robot: coupled human-robot kinematics, parallel-arm sensing
//! geometry, linear extended state observers for human-input estimation,
//! and a feedback-linearizing LQR controller with disturbance feedforward.

pub mod controller;
pub mod frames;
pub mod observer;
pub mod plant;
pub mod sim;
pub mod sysid;

pub use controller::{ControllerConfig, ErrorState, GainMatrix, PidGains, PidState, VirtualCommand};
pub use frames::{ArmGeometry, ArmReading, Pose2, Workspace};
pub use observer::{ObserverGains, ObserverState};
pub use plant::{ActuatorParams, Disturbance, HumanCommand, RobotCommand, WheelPair};
pub use sim::{ErrorStats, ScenarioConfig, SimLog};
pub use sysid::{FitResult, SysIdLog};
