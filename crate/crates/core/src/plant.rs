//! Ground-truth simulation models: human 3-DoF planar kinematics, robot
//! unicycle kinematics, the coupled relative-state derivative, the true
//! human-input disturbance, and the identified wheel actuator dynamics.

use crate::frames::Pose2;
use serde::{Deserialize, Serialize};

/// Human inputs: translational speed, direction of translation in the world
/// frame, and yaw rate. The translation direction `delta` is independent of
/// the body heading (holonomic pelvis motion).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanCommand {
    /// Translational speed, m/s (non-negative; direction carried by `delta`).
    pub speed: f64,
    /// World-frame direction of the translational velocity, rad.
    pub delta: f64,
    /// Yaw rate, rad/s.
    pub yaw_rate: f64,
}

impl HumanCommand {
    pub fn stationary() -> Self {
        Self {
            speed: 0.0,
            delta: 0.0,
            yaw_rate: 0.0,
        }
    }
}

/// Robot inputs: forward speed and yaw rate of the unicycle base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotCommand {
    pub v: f64,
    pub w: f64,
}

impl RobotCommand {
    pub fn zero() -> Self {
        Self { v: 0.0, w: 0.0 }
    }
}

/// Components of the human's linear velocity along the robot's X and Y axes.
/// These are the unknown inputs the observers estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    pub d_x: f64,
    pub d_y: f64,
}

impl Disturbance {
    pub fn zero() -> Self {
        Self { d_x: 0.0, d_y: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        self.d_x.hypot(self.d_y)
    }
}

/// Left/right wheel pair; used for wheel speeds (m/s) and voltages (V).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WheelPair {
    pub left: f64,
    pub right: f64,
}

impl WheelPair {
    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }
}

/// First-order speed model of one driven wheel: `tau * v_dot = K * u - v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WheelModel {
    /// Steady-state speed per volt, (m/s)/V.
    pub gain: f64,
    /// Time constant, s.
    pub time_constant: f64,
}

/// Identified actuator parameters: one first-order model per wheel plus the
/// wheel track used by the differential-drive map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActuatorParams {
    pub left: WheelModel,
    pub right: WheelModel,
    /// Lateral distance between wheel contact points, m.
    pub wheel_track: f64,
    /// Supply voltage bound applied to commanded wheel voltages, V.
    pub max_voltage: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        let wheel = WheelModel {
            gain: 0.12,
            time_constant: 0.35,
        };
        Self {
            left: wheel,
            right: wheel,
            wheel_track: 0.55,
            max_voltage: 24.0,
        }
    }
}

/// Advance the robot unicycle `x_dot = v cos(theta), y_dot = v sin(theta),
/// theta_dot = w` over `dt` with one RK4 step (command held constant).
pub fn robot_step(pose: &Pose2, cmd: &RobotCommand, dt: f64) -> Pose2 {
    debug_assert!(dt > 0.0);
    let f = |theta: f64| [cmd.v * theta.cos(), cmd.v * theta.sin(), cmd.w];
    let t0 = pose.theta();
    let k1 = f(t0);
    let k2 = f(t0 + 0.5 * dt * k1[2]);
    let k3 = f(t0 + 0.5 * dt * k2[2]);
    let k4 = f(t0 + dt * k3[2]);
    Pose2::new(
        pose.x + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        pose.y + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        t0 + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )
}

/// Advance the human `x_dot = v cos(delta), y_dot = v sin(delta),
/// theta_dot = w` over `dt`. The right-hand side is state-independent for a
/// held command, so the update is the exact integral.
pub fn human_step(pose: &Pose2, cmd: &HumanCommand, dt: f64) -> Pose2 {
    debug_assert!(dt > 0.0);
    Pose2::new(
        pose.x + cmd.speed * cmd.delta.cos() * dt,
        pose.y + cmd.speed * cmd.delta.sin() * dt,
        pose.theta() + cmd.yaw_rate * dt,
    )
}

/// Time derivative of the relative state (human pose in the robot frame)
/// under the given robot and human commands.
pub fn coupled_derivative(
    relative: &Pose2,
    cmd_r: &RobotCommand,
    cmd_h: &HumanCommand,
    theta_r: f64,
) -> (f64, f64, f64) {
    let d = true_disturbance(cmd_h, theta_r);
    (
        relative.y * cmd_r.w - cmd_r.v + d.d_x,
        -relative.x * cmd_r.w + d.d_y,
        -cmd_r.w + cmd_h.yaw_rate,
    )
}

/// The human linear velocity resolved along the robot axes.
pub fn true_disturbance(cmd_h: &HumanCommand, theta_r: f64) -> Disturbance {
    let (sin_a, cos_a) = (cmd_h.delta - theta_r).sin_cos();
    Disturbance {
        d_x: cmd_h.speed * cos_a,
        d_y: cmd_h.speed * sin_a,
    }
}

/// Advance both wheel speeds under held voltages by the exact exponential
/// solution of the first-order model.
pub fn actuator_step(
    speeds: &WheelPair,
    voltages: &WheelPair,
    params: &ActuatorParams,
    dt: f64,
) -> WheelPair {
    debug_assert!(dt > 0.0);
    let step = |v: f64, u: f64, m: &WheelModel| {
        let target = m.gain * u;
        target + (v - target) * (-dt / m.time_constant).exp()
    };
    WheelPair {
        left: step(speeds.left, voltages.left, &params.left),
        right: step(speeds.right, voltages.right, &params.right),
    }
}

/// Differential-drive forward map: wheel speeds to body command.
pub fn diff_drive(speeds: &WheelPair, params: &ActuatorParams) -> RobotCommand {
    RobotCommand {
        v: (speeds.left + speeds.right) / 2.0,
        w: (speeds.right - speeds.left) / params.wheel_track,
    }
}

/// Inverse differential-drive map: body command to wheel speeds.
pub fn inverse_diff_drive(cmd: &RobotCommand, params: &ActuatorParams) -> WheelPair {
    let half_track = params.wheel_track / 2.0;
    WheelPair {
        left: cmd.v - cmd.w * half_track,
        right: cmd.v + cmd.w * half_track,
    }
}

/// Per-wheel PI speed loop closing commanded wheel speeds through the
/// actuator model (the "dynamic" fidelity inner loop).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct WheelPiGains {
    pub kp: f64,
    pub ki: f64,
}

impl Default for WheelPiGains {
    fn default() -> Self {
        // Pole placement for the default wheel model at omega_n = 40 rad/s,
        // critically damped: settles well under 100 ms.
        Self::for_model(
            &WheelModel {
                gain: 0.12,
                time_constant: 0.35,
            },
            40.0,
            1.0,
        )
    }
}

impl WheelPiGains {
    /// Place the closed speed-loop poles at natural frequency `omega_n` with
    /// damping `zeta` for the given wheel model.
    pub fn for_model(model: &WheelModel, omega_n: f64, zeta: f64) -> Self {
        Self {
            kp: (2.0 * zeta * omega_n * model.time_constant - 1.0) / model.gain,
            ki: omega_n * omega_n * model.time_constant / model.gain,
        }
    }
}

/// State of the two PI wheel-speed loops.
#[derive(Clone, Copy, Debug, Default)]
pub struct WheelPiState {
    integral: WheelPair,
}

impl WheelPiState {
    /// One PI update: voltages for the current tick, saturated to the supply
    /// bound with conditional (anti-windup) integration.
    pub fn update(
        &mut self,
        target: &WheelPair,
        measured: &WheelPair,
        gains: &WheelPiGains,
        params: &ActuatorParams,
        dt: f64,
    ) -> WheelPair {
        let mut wheel = |err: f64, integral: &mut f64| {
            let cand = *integral + err * dt;
            let raw = gains.kp * err + gains.ki * cand;
            let sat = raw.clamp(-params.max_voltage, params.max_voltage);
            if sat == raw {
                *integral = cand;
            }
            sat
        };
        WheelPair {
            left: wheel(target.left - measured.left, &mut self.integral.left),
            right: wheel(target.right - measured.right, &mut self.integral.right),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{robot_to_world, world_to_robot, wrap_angle};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn robot_step_straight_line() {
        let p = robot_step(&Pose2::origin(), &RobotCommand { v: 1.0, w: 0.0 }, 1.0);
        assert_eq!((p.x, p.y, p.theta()), (1.0, 0.0, 0.0));
    }

    #[test]
    fn robot_step_pure_rotation() {
        let p = robot_step(
            &Pose2::origin(),
            &RobotCommand {
                v: 0.0,
                w: PI / 2.0,
            },
            1.0,
        );
        assert_eq!(p.x, 0.0);
        assert_eq!(p.y, 0.0);
        assert_abs_diff_eq!(p.theta(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn robot_step_closes_unit_circle() {
        // v = 1, w = 2*pi closes a circle of radius 1/(2*pi) in one second.
        let cmd = RobotCommand { v: 1.0, w: TAU };
        let dt = 1.0 / 200.0;
        let mut pose = Pose2::origin();
        for _ in 0..200 {
            pose = robot_step(&pose, &cmd, dt);
        }
        assert_abs_diff_eq!(pose.x, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(pose.y, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(wrap_angle(pose.theta()), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn robot_step_rk4_fourth_order_convergence() {
        // Against the analytic arc, halving dt shrinks the error ~16x.
        let cmd = RobotCommand { v: 1.0, w: TAU };
        let radius = cmd.v / cmd.w;
        let error_at = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut pose = Pose2::origin();
            for _ in 0..n {
                pose = robot_step(&pose, &cmd, dt);
            }
            // quarter-turn reference at t = 1/4 of the period scaled: here we
            // integrate the full second; reference is the closed circle with
            // exact angle 2*pi*t.
            let theta_exact = TAU;
            let x_exact = radius * theta_exact.sin();
            let y_exact = radius * (1.0 - theta_exact.cos());
            ((pose.x - x_exact).powi(2) + (pose.y - y_exact).powi(2)).sqrt()
        };
        let e1 = error_at(50);
        let e2 = error_at(100);
        let ratio = e1 / e2;
        assert!(
            (10.0..24.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio}"
        );
    }

    #[test]
    fn robot_step_zero_yaw_preserves_heading_exactly() {
        let pose = Pose2::new(0.3, -0.2, 0.734);
        let next = robot_step(&pose, &RobotCommand { v: 0.8, w: 0.0 }, 0.005);
        assert_eq!(next.theta(), pose.theta());
    }

    #[test]
    fn human_step_sidesteps_without_turning() {
        let cmd = HumanCommand {
            speed: 1.0,
            delta: PI / 2.0,
            yaw_rate: 0.0,
        };
        let p = human_step(&Pose2::origin(), &cmd, 1.0);
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-15);
        assert_eq!(p.theta(), 0.0);
    }

    #[test]
    fn human_step_turn_in_place() {
        let cmd = HumanCommand {
            speed: 0.0,
            delta: 0.0,
            yaw_rate: 1.0,
        };
        let p = human_step(&Pose2::origin(), &cmd, 0.5);
        assert_eq!((p.x, p.y), (0.0, 0.0));
        assert_abs_diff_eq!(p.theta(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn human_step_constant_command_closed_form() {
        let cmd = HumanCommand {
            speed: 1.0,
            delta: 0.3,
            yaw_rate: 0.0,
        };
        let p = human_step(&Pose2::new(1.0, 1.0, 0.3), &cmd, 2.0);
        assert_abs_diff_eq!(p.x, 1.0 + 2.0 * 0.3f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 1.0 + 2.0 * 0.3f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.theta(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn coupled_derivative_static_system() {
        let d = coupled_derivative(
            &Pose2::new(0.55, 0.0, 0.0),
            &RobotCommand::zero(),
            &HumanCommand::stationary(),
            0.0,
        );
        assert_eq!(d, (0.0, 0.0, 0.0));
    }

    #[test]
    fn coupled_derivative_matched_speeds_hold_distance() {
        let theta_r = 0.4;
        let cmd_r = RobotCommand { v: 0.5, w: 0.0 };
        let cmd_h = HumanCommand {
            speed: 0.5,
            delta: theta_r,
            yaw_rate: 0.1,
        };
        let (dx, dy, _) =
            coupled_derivative(&Pose2::new(0.8, 0.0, 0.0), &cmd_r, &cmd_h, theta_r);
        assert_abs_diff_eq!(dx, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dy, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn coupled_derivative_matches_finite_difference() {
        // Step both agents by h and difference the transformed relative pose.
        let h = 1e-6;
        let robot = Pose2::new(0.2, -0.1, 0.3);
        let human = Pose2::new(0.9, 0.25, 0.5);
        let cmd_r = RobotCommand { v: 0.4, w: 0.6 };
        let cmd_h = HumanCommand {
            speed: 0.7,
            delta: 0.9,
            yaw_rate: -0.3,
        };
        let rel0 = world_to_robot(&human, &robot);
        let rel1 = world_to_robot(
            &human_step(&human, &cmd_h, h),
            &robot_step(&robot, &cmd_r, h),
        );
        let fd = (
            (rel1.x - rel0.x) / h,
            (rel1.y - rel0.y) / h,
            wrap_angle(rel1.theta() - rel0.theta()) / h,
        );
        let an = coupled_derivative(&rel0, &cmd_r, &cmd_h, robot.theta());
        assert_abs_diff_eq!(fd.0, an.0, epsilon = 1e-5);
        assert_abs_diff_eq!(fd.1, an.1, epsilon = 1e-5);
        assert_abs_diff_eq!(fd.2, an.2, epsilon = 1e-5);
    }

    #[test]
    fn true_disturbance_cases() {
        let still = HumanCommand::stationary();
        assert_eq!(true_disturbance(&still, 1.3), Disturbance::zero());

        let aligned = HumanCommand {
            speed: 1.0,
            delta: 0.7,
            yaw_rate: 0.0,
        };
        let d = true_disturbance(&aligned, 0.7);
        assert_abs_diff_eq!(d.d_x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.d_y, 0.0, epsilon = 1e-15);

        let skew = HumanCommand {
            speed: 2.0,
            delta: PI / 6.0,
            yaw_rate: 0.0,
        };
        let d = true_disturbance(&skew, 0.0);
        assert_abs_diff_eq!(d.d_x, 3.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.d_y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn actuator_step_rest_stays_at_rest() {
        let params = ActuatorParams::default();
        let next = actuator_step(&WheelPair::default(), &WheelPair::default(), &params, 0.01);
        assert_eq!(next, WheelPair::default());
    }

    #[test]
    fn actuator_step_first_order_response() {
        let mut params = ActuatorParams::default();
        params.left = WheelModel {
            gain: 0.2,
            time_constant: 0.5,
        };
        params.right = params.left;
        let u = WheelPair::new(10.0, 10.0);

        // Steady state K*u for very long dt.
        let settled = actuator_step(&WheelPair::default(), &u, &params, 1e6);
        assert_abs_diff_eq!(settled.left, 2.0, epsilon = 1e-12);

        // Closed form after one time constant.
        let v = actuator_step(&WheelPair::default(), &u, &params, 0.5);
        assert_abs_diff_eq!(v.left, 2.0 * (1.0 - (-1.0f64).exp()), epsilon = 1e-12);
        assert_abs_diff_eq!(v.left, 1.2642, epsilon = 1e-4);
    }

    #[test]
    fn actuator_step_matches_closed_form_over_many_steps() {
        let params = ActuatorParams::default();
        let u = WheelPair::new(7.0, -3.0);
        let dt = 0.005;
        let mut v = WheelPair::new(0.3, -0.1);
        for _ in 0..400 {
            v = actuator_step(&v, &u, &params, dt);
        }
        let t = 400.0 * dt;
        let exact = |v0: f64, uv: f64, m: &WheelModel| {
            m.gain * uv + (v0 - m.gain * uv) * (-t / m.time_constant).exp()
        };
        assert_abs_diff_eq!(v.left, exact(0.3, 7.0, &params.left), epsilon = 1e-12);
        assert_abs_diff_eq!(v.right, exact(-0.1, -3.0, &params.right), epsilon = 1e-12);
    }

    #[test]
    fn diff_drive_cases() {
        let params = ActuatorParams {
            wheel_track: 0.5,
            ..Default::default()
        };
        let straight = diff_drive(&WheelPair::new(1.0, 1.0), &params);
        assert_eq!(straight, RobotCommand { v: 1.0, w: 0.0 });
        let spin = diff_drive(&WheelPair::new(-1.0, 1.0), &params);
        assert_eq!(spin, RobotCommand { v: 0.0, w: 4.0 });
    }

    #[test]
    fn wheel_pi_settles_quickly() {
        let params = ActuatorParams::default();
        let gains = WheelPiGains::default();
        let mut pi = WheelPiState::default();
        let mut speeds = WheelPair::default();
        let target = WheelPair::new(0.5, 0.5);
        let dt = 0.005;
        let mut settled_at = None;
        for k in 0..200 {
            let u = pi.update(&target, &speeds, &gains, &params, dt);
            speeds = actuator_step(&speeds, &u, &params, dt);
            if settled_at.is_none() && (speeds.left - 0.5).abs() < 0.01 {
                settled_at = Some(k as f64 * dt);
            }
        }
        let t = settled_at.expect("wheel speed loop never settled");
        assert!(t < 0.1, "settling time {t} s exceeds 100 ms");
        assert_abs_diff_eq!(speeds.left, 0.5, epsilon = 1e-3);
    }

    proptest! {
        #[test]
        fn prop_disturbance_norm_equals_speed(
            speed in 0.0..3.0f64,
            delta in -4.0..4.0f64,
            theta_r in -4.0..4.0f64,
        ) {
            let cmd = HumanCommand { speed, delta, yaw_rate: 0.0 };
            let d = true_disturbance(&cmd, theta_r);
            prop_assert!((d.norm() - speed).abs() < 1e-12);
        }

        #[test]
        fn prop_diff_drive_inverse_pair(
            v in -2.0..2.0f64,
            w in -3.0..3.0f64,
            track in 0.2..1.0f64,
        ) {
            let params = ActuatorParams { wheel_track: track, ..Default::default() };
            let cmd = RobotCommand { v, w };
            let back = diff_drive(&inverse_diff_drive(&cmd, &params), &params);
            prop_assert!((back.v - v).abs() < 1e-12);
            prop_assert!((back.w - w).abs() < 1e-12);
        }

        #[test]
        fn prop_human_step_zero_yaw_preserves_heading(
            x in -5.0..5.0f64,
            y in -5.0..5.0f64,
            theta in -3.0..3.0f64,
            speed in 0.0..2.0f64,
            delta in -3.0..3.0f64,
        ) {
            let p = Pose2::new(x, y, theta);
            let next = human_step(&p, &HumanCommand { speed, delta, yaw_rate: 0.0 }, 0.005);
            prop_assert_eq!(next.theta(), p.theta());
        }
    }
}
