//! Scenario configuration: everything a closed-loop run needs, serializable
//! so runs are reproducible from a single document.

use super::scenario::{GeneratorKind, GeneratorParams};
use super::SimError;
use crate::controller::{ControllerConfig, PidGains};
use crate::frames::ArmGeometry;
use crate::observer::{default_gains, ObserverGains};
use crate::plant::{ActuatorParams, WheelPiGains};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// Commands are realized instantly by the unicycle model.
    Kinematic,
    /// Commands pass through the PI wheel-speed loop and the identified
    /// first-order actuator model.
    Dynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sensing {
    /// The arm round trip with exact encoder values.
    Ideal,
    /// Encoder readings rounded to the configured resolutions.
    Quantized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Observer-based LQR with disturbance feedforward.
    Proposed,
    /// Per-axis PID baseline through the same decoupling map.
    Pid,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Proposed => "proposed",
            ControllerKind::Pid => "pid",
        }
    }
}

/// Source of the disturbance estimate fed to the controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// The linear extended state observers (normal operation).
    Leso,
    /// Oracle feed of the true disturbance, for validation runs.
    TrueDisturbance,
}

/// Where the human trajectory comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TrajectorySource {
    Generator {
        name: GeneratorKind,
        #[serde(default)]
        params: GeneratorParams,
    },
    Csv {
        path: PathBuf,
    },
}

impl Default for TrajectorySource {
    fn default() -> Self {
        TrajectorySource::Generator {
            name: GeneratorKind::InPlace,
            params: GeneratorParams::default(),
        }
    }
}

/// Encoder quantization model for the `quantized` sensing mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantizationConfig {
    /// Rotary encoder resolution, counts per revolution.
    pub angular_counts_per_rev: f64,
    /// Linear slider resolution, m.
    pub linear_resolution: f64,
    /// Consistency tolerance to use for the arm forward pass under
    /// quantization (rounding perturbs the implied bar width).
    pub consistency_tol: f64,
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        Self {
            angular_counts_per_rev: 4096.0,
            linear_resolution: 5e-4,
            consistency_tol: 0.01,
        }
    }
}

/// Full description of one closed-loop run. Identical configs (including
/// the seed) produce bitwise-identical logs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Control and sampling frequency, Hz.
    pub f_s: f64,
    /// Run length, s; defaults to the generator's standard duration or the
    /// CSV span.
    pub duration: Option<f64>,
    pub fidelity: Fidelity,
    pub sensing: Sensing,
    pub controller: ControllerKind,
    pub estimator: Estimator,
    /// Initial relative-pose offset from the setpoint, m (transient studies).
    pub initial_offset: [f64; 2],
    pub trajectory: TrajectorySource,
    pub arm: ArmGeometry,
    pub quantization: QuantizationConfig,
    pub actuator: ActuatorParams,
    pub wheel_pi: WheelPiGains,
    /// Observer gains; when omitted, derived from `f_s`.
    pub observer: Option<ObserverGains>,
    pub control: ControllerConfig,
    pub pid: PidGains,
    /// Statistics window start, s; when omitted, detected from walk onset.
    pub window_start: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            f_s: 200.0,
            duration: None,
            fidelity: Fidelity::Kinematic,
            sensing: Sensing::Ideal,
            controller: ControllerKind::Proposed,
            estimator: Estimator::Leso,
            initial_offset: [0.0, 0.0],
            trajectory: TrajectorySource::default(),
            arm: ArmGeometry::default(),
            quantization: QuantizationConfig::default(),
            actuator: ActuatorParams::default(),
            wheel_pi: WheelPiGains::default(),
            observer: None,
            control: ControllerConfig::default(),
            pid: PidGains::default(),
            window_start: None,
        }
    }
}

impl ScenarioConfig {
    /// Observer gains, falling back to the sampling-frequency rule.
    pub fn observer_gains(&self) -> ObserverGains {
        self.observer.unwrap_or_else(|| default_gains(self.f_s))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.f_s > 0.0 && self.f_s.is_finite()) {
            return Err(SimError::BadConfig("f_s must be positive".into()));
        }
        if let Some(d) = self.duration {
            if !(d > 0.0 && d.is_finite()) {
                return Err(SimError::BadConfig("duration must be positive".into()));
            }
        }
        if !self.observer_gains().is_valid() {
            return Err(SimError::BadConfig(
                "observer gains must be strictly positive".into(),
            ));
        }
        self.control
            .validate()
            .map_err(SimError::BadConfig)?;
        let arm = &self.arm;
        if arm.joint_separation <= 0.0 || arm.hri_width <= 0.0 {
            return Err(SimError::BadConfig(
                "arm joint_separation and hri_width must be positive".into(),
            ));
        }
        if !(arm.workspace.x_min > 0.0 && arm.workspace.x_min < arm.workspace.x_max) {
            return Err(SimError::BadConfig(
                "arm workspace must satisfy 0 < x_min < x_max".into(),
            ));
        }
        let act = &self.actuator;
        for wheel in [&act.left, &act.right] {
            if wheel.gain <= 0.0 || wheel.time_constant <= 0.0 {
                return Err(SimError::BadConfig(
                    "actuator gains and time constants must be positive".into(),
                ));
            }
        }
        if act.wheel_track <= 0.0 {
            return Err(SimError::BadConfig("wheel track must be positive".into()));
        }
        if self.quantization.angular_counts_per_rev <= 0.0
            || self.quantization.linear_resolution <= 0.0
        {
            return Err(SimError::BadConfig(
                "quantization resolutions must be positive".into(),
            ));
        }
        Ok(())
    }
}
