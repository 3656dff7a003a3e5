//! Planar coordinate transforms between world and robot frames, and the
//! parallel-arm kinematics that map encoder readings to the human's pose
//! relative to the robot (and back, for simulated sensing).
//!
//! Frame convention: the robot frame has its origin on the wheel axle
//! midpoint, X pointing along the driving direction. The two arm rotary
//! joints sit at (0, +D/2) (left) and (0, -D/2) (right) in the robot frame,
//! where D is the joint separation.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Wrap an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Planar pose: position in meters, heading in radians wrapped to (-pi, pi].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    theta: f64,
}

impl Pose2 {
    /// Create a pose; the heading is wrapped to (-pi, pi].
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Error produced by the arm sensing geometry.
#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    /// The two encoder-implied attachment points are not `hri_width` apart,
    /// so the reading cannot come from a rigid interface bar.
    #[error("inconsistent arm reading: attachment separation {separation:.6} m, expected {expected:.6} m (tolerance {tolerance:.1e})")]
    InconsistentReading {
        separation: f64,
        expected: f64,
        tolerance: f64,
    },
    /// Requested relative pose falls outside the mechanical workspace.
    #[error("relative pose ({x:.3}, {y:.3}, {theta:.3}) outside arm workspace")]
    OutOfWorkspace { x: f64, y: f64, theta: f64 },
}

/// Reachable region of the relative pose, used to keep the simulated
/// sensing path well-posed.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Workspace {
    pub x_min: f64,
    pub x_max: f64,
    pub y_abs_max: f64,
    pub theta_abs_max: f64,
}

impl Default for Workspace {
    fn default() -> Self {
        Self {
            x_min: 0.3,
            x_max: 1.2,
            y_abs_max: 0.35,
            theta_abs_max: PI / 4.0,
        }
    }
}

impl Workspace {
    pub fn contains(&self, pose: &Pose2) -> bool {
        pose.x >= self.x_min
            && pose.x <= self.x_max
            && pose.y.abs() <= self.y_abs_max
            && pose.theta().abs() <= self.theta_abs_max
    }
}

/// Fixed geometry of the parallel sensing arm.
///
/// `joint_separation` is the distance D between the two rotary joints on the
/// base; `hri_width` is the width W of the interface bar between the two
/// slider attachment points at the user's pelvis.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmGeometry {
    pub joint_separation: f64,
    pub hri_width: f64,
    pub workspace: Workspace,
    /// Allowed deviation of the implied attachment separation from
    /// `hri_width` before a reading is rejected. Widen for quantized input.
    pub consistency_tol: f64,
}

impl Default for ArmGeometry {
    fn default() -> Self {
        Self {
            joint_separation: 0.6,
            hri_width: 0.45,
            workspace: Workspace::default(),
            consistency_tol: 1e-6,
        }
    }
}

/// Raw arm encoder quantities: slider distances and arm angles, left and
/// right, both measured from the rotary joints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmReading {
    pub d_left: f64,
    pub theta_left: f64,
    pub d_right: f64,
    pub theta_right: f64,
}

/// Express the human world pose in the robot frame.
pub fn world_to_robot(human_world: &Pose2, robot_world: &Pose2) -> Pose2 {
    let (sin_r, cos_r) = robot_world.theta().sin_cos();
    let dx = human_world.x - robot_world.x;
    let dy = human_world.y - robot_world.y;
    Pose2::new(
        cos_r * dx + sin_r * dy,
        -sin_r * dx + cos_r * dy,
        human_world.theta() - robot_world.theta(),
    )
}

/// Inverse of [`world_to_robot`]: map a relative pose back to the world frame.
pub fn robot_to_world(relative: &Pose2, robot_world: &Pose2) -> Pose2 {
    let (sin_r, cos_r) = robot_world.theta().sin_cos();
    Pose2::new(
        robot_world.x + cos_r * relative.x - sin_r * relative.y,
        robot_world.y + sin_r * relative.x + cos_r * relative.y,
        relative.theta() + robot_world.theta(),
    )
}

fn attachment_points(reading: &ArmReading, geom: &ArmGeometry) -> ([f64; 2], [f64; 2]) {
    let half_d = geom.joint_separation / 2.0;
    let left = [
        reading.d_left * reading.theta_left.cos(),
        half_d + reading.d_left * reading.theta_left.sin(),
    ];
    let right = [
        reading.d_right * reading.theta_right.cos(),
        -half_d + reading.d_right * reading.theta_right.sin(),
    ];
    (left, right)
}

/// Forward arm kinematics: encoder reading to relative human pose.
///
/// The pose position is the midpoint of the two attachment points; the
/// heading is the direction perpendicular to the right-to-left attachment
/// segment, pointing away from the robot.
pub fn arm_forward(reading: &ArmReading, geom: &ArmGeometry) -> Result<Pose2, FrameError> {
    let (left, right) = attachment_points(reading, geom);
    let bar_x = left[0] - right[0];
    let bar_y = left[1] - right[1];
    let separation = bar_x.hypot(bar_y);
    if (separation - geom.hri_width).abs() > geom.consistency_tol {
        return Err(FrameError::InconsistentReading {
            separation,
            expected: geom.hri_width,
            tolerance: geom.consistency_tol,
        });
    }
    Ok(Pose2::new(
        (left[0] + right[0]) / 2.0,
        (left[1] + right[1]) / 2.0,
        bar_y.atan2(bar_x) - PI / 2.0,
    ))
}

/// Inverse arm kinematics: relative human pose to the unique encoder reading
/// that would measure it. This is the simulated sensing path.
pub fn arm_inverse(relative: &Pose2, geom: &ArmGeometry) -> Result<ArmReading, FrameError> {
    let out_of_workspace = || FrameError::OutOfWorkspace {
        x: relative.x,
        y: relative.y,
        theta: relative.theta(),
    };
    if !geom.workspace.contains(relative) {
        return Err(out_of_workspace());
    }
    // The interface bar is rigidly perpendicular to the human heading, so
    // the attachments sit at P +/- (W/2) * (-sin theta, cos theta).
    let (sin_t, cos_t) = relative.theta().sin_cos();
    let half_w = geom.hri_width / 2.0;
    let half_d = geom.joint_separation / 2.0;
    let left = [relative.x - half_w * sin_t, relative.y + half_w * cos_t];
    let right = [relative.x + half_w * sin_t, relative.y - half_w * cos_t];
    let d_left = left[0].hypot(left[1] - half_d);
    let d_right = right[0].hypot(right[1] + half_d);
    if d_left <= 0.0 || d_right <= 0.0 {
        return Err(out_of_workspace());
    }
    Ok(ArmReading {
        d_left,
        theta_left: (left[1] - half_d).atan2(left[0]),
        d_right,
        theta_right: (right[1] + half_d).atan2(right[0]),
    })
}

/// Round a reading to the encoder lattice: angles to the nearest
/// `2*pi / counts_per_rev`, distances to the nearest `linear_resolution`.
pub fn quantize_reading(
    reading: &ArmReading,
    counts_per_rev: f64,
    linear_resolution: f64,
) -> ArmReading {
    assert!(counts_per_rev > 0.0 && linear_resolution > 0.0);
    let angle_step = TAU / counts_per_rev;
    let q = |v: f64, step: f64| (v / step).round() * step;
    ArmReading {
        d_left: q(reading.d_left, linear_resolution),
        theta_left: q(reading.theta_left, angle_step),
        d_right: q(reading.d_right, linear_resolution),
        theta_right: q(reading.theta_right, angle_step),
    }
}
