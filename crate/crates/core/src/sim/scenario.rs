//! Synthetic walking-mode generators standing in for motion-capture data:
//! swaying in place, accelerating/decelerating on a straight path, slalom
//! direction changes, and stop-and-go walking. All generators produce
//! C1-continuous positions on the control-rate grid.

use super::trajectory::{Trajectory, TrajectorySample};
use super::SimError;
use crate::frames::Pose2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Named walking mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Lateral pelvic sway with zero mean displacement.
    InPlace,
    /// Straight path with a trapezoidal speed profile.
    StraightAccel,
    /// Sinusoidal heading changes while advancing.
    Slalom,
    /// Alternating walk and stand phases with smooth speed ramps.
    StopGo,
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::InPlace => "in_place",
            GeneratorKind::StraightAccel => "straight_accel",
            GeneratorKind::Slalom => "slalom",
            GeneratorKind::StopGo => "stop_go",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "in_place" => Some(GeneratorKind::InPlace),
            "straight_accel" => Some(GeneratorKind::StraightAccel),
            "slalom" => Some(GeneratorKind::Slalom),
            "stop_go" => Some(GeneratorKind::StopGo),
            _ => None,
        }
    }

    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::InPlace,
        GeneratorKind::StraightAccel,
        GeneratorKind::Slalom,
        GeneratorKind::StopGo,
    ];

    /// Default scenario duration, s.
    pub fn default_duration(&self) -> f64 {
        match self {
            GeneratorKind::InPlace => 10.0,
            GeneratorKind::StraightAccel => 12.0,
            GeneratorKind::Slalom => 20.0,
            GeneratorKind::StopGo => 16.0,
        }
    }
}

/// Generator parameters; each generator reads the fields relevant to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    /// Lateral sway amplitude for `in_place`, m.
    pub sway_amplitude: f64,
    /// Sway frequency for `in_place`, Hz.
    pub sway_frequency: f64,
    /// Peak speed of the `straight_accel` trapezoid, m/s.
    pub peak_speed: f64,
    /// Acceleration/deceleration ramp duration for `straight_accel`, s.
    pub ramp_time: f64,
    /// Advance speed for `slalom` and `stop_go`, m/s.
    pub speed: f64,
    /// Heading amplitude for `slalom`, rad.
    pub heading_amplitude: f64,
    /// Heading frequency for `slalom`, Hz.
    pub heading_frequency: f64,
    /// Walk phase duration for `stop_go`, s.
    pub walk_time: f64,
    /// Stand phase duration for `stop_go`, s.
    pub stand_time: f64,
    /// Speed ramp duration at each end of a `stop_go` walk phase, s.
    pub speed_ramp: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            sway_amplitude: 0.03,
            sway_frequency: 1.0,
            peak_speed: 1.0,
            ramp_time: 1.5,
            speed: 0.8,
            heading_amplitude: PI / 6.0,
            heading_frequency: 0.2,
            walk_time: 2.0,
            stand_time: 2.0,
            speed_ramp: 0.3,
        }
    }
}

fn bad(msg: impl Into<String>) -> SimError {
    SimError::BadParams(msg.into())
}

/// Produce a synthetic trajectory sampled at `f_s` over `duration`.
///
/// The generators are deterministic closed-form shapes; the seed is part of
/// the scenario contract (identical seeds give bitwise-identical output) but
/// none of the present generators draws randomness from it.
pub fn generate_scenario(
    kind: GeneratorKind,
    params: &GeneratorParams,
    f_s: f64,
    duration: f64,
    _seed: u64,
) -> Result<Trajectory, SimError> {
    if !(f_s > 0.0) {
        return Err(bad("sampling frequency must be positive"));
    }
    if !(duration > 0.0) {
        return Err(bad("duration must be positive"));
    }
    let dt = 1.0 / f_s;
    let n = (duration * f_s).round() as usize;
    let samples = match kind {
        GeneratorKind::InPlace => {
            if params.sway_amplitude < 0.0 || params.sway_frequency <= 0.0 {
                return Err(bad("in_place requires sway_amplitude >= 0 and sway_frequency > 0"));
            }
            (0..=n)
                .map(|k| {
                    let t = k as f64 * dt;
                    TrajectorySample {
                        t,
                        pose: Pose2::new(
                            0.0,
                            params.sway_amplitude * (TAU * params.sway_frequency * t).sin(),
                            0.0,
                        ),
                    }
                })
                .collect()
        }
        GeneratorKind::StraightAccel => {
            if params.peak_speed <= 0.0 || params.ramp_time <= 0.0 {
                return Err(bad("straight_accel requires positive peak_speed and ramp_time"));
            }
            if duration < 2.0 * params.ramp_time {
                return Err(bad(format!(
                    "straight_accel duration {duration} s shorter than two ramps ({} s)",
                    2.0 * params.ramp_time
                )));
            }
            let v = params.peak_speed;
            let tr = params.ramp_time;
            let total = duration;
            let position = |t: f64| -> f64 {
                if t < tr {
                    v * t * t / (2.0 * tr)
                } else if t <= total - tr {
                    v * tr / 2.0 + v * (t - tr)
                } else {
                    let tail = t - (total - tr);
                    v * tr / 2.0 + v * (total - 2.0 * tr) + v * tail - v * tail * tail / (2.0 * tr)
                }
            };
            (0..=n)
                .map(|k| {
                    let t = k as f64 * dt;
                    TrajectorySample {
                        t,
                        pose: Pose2::new(position(t), 0.0, 0.0),
                    }
                })
                .collect()
        }
        GeneratorKind::Slalom => {
            if params.speed <= 0.0
                || params.heading_frequency <= 0.0
                || !(0.0..PI / 2.0).contains(&params.heading_amplitude)
            {
                return Err(bad(
                    "slalom requires positive speed and frequency, heading amplitude in [0, pi/2)",
                ));
            }
            let heading =
                |t: f64| params.heading_amplitude * (TAU * params.heading_frequency * t).sin();
            // Position follows x_dot = s cos(theta(t)), y_dot = s sin(theta(t));
            // integrate per tick with RK4 on the analytic heading.
            let mut x = 0.0;
            let mut y = 0.0;
            let mut samples = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let t = k as f64 * dt;
                samples.push(TrajectorySample {
                    t,
                    pose: Pose2::new(x, y, heading(t)),
                });
                let stage = |tau: f64| {
                    let h = heading(tau);
                    (params.speed * h.cos(), params.speed * h.sin())
                };
                let k1 = stage(t);
                let k2 = stage(t + dt / 2.0);
                let k4 = stage(t + dt);
                // The RHS is state-independent, so k3 = k2.
                x += dt / 6.0 * (k1.0 + 4.0 * k2.0 + k4.0);
                y += dt / 6.0 * (k1.1 + 4.0 * k2.1 + k4.1);
            }
            samples
        }
        GeneratorKind::StopGo => {
            if params.speed <= 0.0 || params.speed_ramp <= 0.0 || params.stand_time < 0.0 {
                return Err(bad("stop_go requires positive speed and speed_ramp"));
            }
            if params.walk_time < 2.0 * params.speed_ramp {
                return Err(bad(format!(
                    "stop_go walk_time {} s shorter than two speed ramps ({} s)",
                    params.walk_time,
                    2.0 * params.speed_ramp
                )));
            }
            let cycle = params.walk_time + params.stand_time;
            let ramp = params.speed_ramp;
            let speed_at = |t: f64| -> f64 {
                let phase = t.rem_euclid(cycle);
                if phase >= params.walk_time {
                    return 0.0;
                }
                let envelope = if phase < ramp {
                    0.5 * (1.0 - (PI * phase / ramp).cos())
                } else if phase > params.walk_time - ramp {
                    0.5 * (1.0 - (PI * (params.walk_time - phase) / ramp).cos())
                } else {
                    1.0
                };
                params.speed * envelope
            };
            // Straight walk along +X; integrate the smooth speed profile
            // with Simpson's rule per tick.
            let mut x = 0.0;
            let mut samples = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let t = k as f64 * dt;
                samples.push(TrajectorySample {
                    t,
                    pose: Pose2::new(x, 0.0, 0.0),
                });
                x += dt / 6.0 * (speed_at(t) + 4.0 * speed_at(t + dt / 2.0) + speed_at(t + dt));
            }
            samples
        }
    };
    Ok(Trajectory { samples })
}
