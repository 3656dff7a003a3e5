//! The closed-loop simulation engine: per tick, sense through the arm
//! geometry, observe, control, actuate, and integrate, with the human pose
//! imposed from the trajectory as an exogenous playback.

use super::config::{ControllerKind, Estimator, Fidelity, ScenarioConfig, Sensing, TrajectorySource};
use super::scenario::generate_scenario;
use super::trajectory::{derive_human_commands, load_trajectory_csv, Trajectory};
use super::SimError;
use crate::controller::{
    control_step, pid_step, solve_lqr, ControllerError, ErrorState, PidState, VirtualCommand,
};
use crate::frames::{arm_forward, arm_inverse, quantize_reading, world_to_robot, FrameError, Pose2};
use crate::observer::{leso_step, ObserverState};
use crate::plant::{
    actuator_step, diff_drive, inverse_diff_drive, robot_step, true_disturbance, Disturbance,
    RobotCommand, WheelPair, WheelPiState,
};

/// One logged tick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub t: f64,
    pub human: Pose2,
    pub robot: Pose2,
    /// True relative pose of the human in the robot frame.
    pub relative: Pose2,
    /// Relative position recovered through the sensing path.
    pub measured: (f64, f64),
    /// Disturbance estimate the controller used this tick.
    pub observer: ObserverState,
    pub d_true: Disturbance,
    /// Virtual command (linearized-system input).
    pub v: (f64, f64),
    /// Physical command applied until the next tick.
    pub u: RobotCommand,
    pub e: ErrorState,
}

/// Why a run ended before its configured duration.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub tick: usize,
    pub t: f64,
    pub reason: String,
}

/// Output of one run: tick records, and the failure marker when the run was
/// cut short by a guard. No record exists at or after a failure tick.
#[derive(Clone, Debug, PartialEq)]
pub struct SimLog {
    pub f_s: f64,
    pub records: Vec<Record>,
    pub failure: Option<Failure>,
}

pub const CSV_HEADER: &str = "t,xh,yh,thh,xr,yr,thr,x_rel,y_rel,th_rel,x_meas,y_meas,dx_true,dy_true,dx_hat,dy_hat,vx,vy,vr,wr,ex,ey";

impl SimLog {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn end_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    /// Serialize the log in the fixed column order.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let row = [
                r.t,
                r.human.x,
                r.human.y,
                r.human.theta(),
                r.robot.x,
                r.robot.y,
                r.robot.theta(),
                r.relative.x,
                r.relative.y,
                r.relative.theta(),
                r.measured.0,
                r.measured.1,
                r.d_true.d_x,
                r.d_true.d_y,
                r.observer.d_x_hat,
                r.observer.d_y_hat,
                r.v.0,
                r.v.1,
                r.u.v,
                r.u.w,
                r.e.e_x,
                r.e.e_y,
            ];
            for (i, value) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{value}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Build the trajectory a config asks for, resampled to the control rate and
/// trimmed to the resolved duration.
pub fn resolve_trajectory(config: &ScenarioConfig) -> Result<(Trajectory, f64), SimError> {
    match &config.trajectory {
        TrajectorySource::Generator { name, params } => {
            let duration = config.duration.unwrap_or_else(|| name.default_duration());
            let traj = generate_scenario(*name, params, config.f_s, duration, config.seed)?;
            Ok((traj, duration))
        }
        TrajectorySource::Csv { path } => {
            let traj = load_trajectory_csv(path, config.f_s)?;
            let span = traj.span();
            let duration = config.duration.unwrap_or(span);
            if duration > span + 1e-9 {
                return Err(SimError::BadConfig(format!(
                    "requested duration {duration} s exceeds trajectory span {span} s"
                )));
            }
            let n = (duration * config.f_s).round() as usize;
            Ok((
                Trajectory {
                    samples: traj.samples[..=n.min(traj.samples.len() - 1)].to_vec(),
                },
                duration,
            ))
        }
    }
}

fn frame_failure(err: FrameError, tick: usize, t: f64) -> Failure {
    Failure {
        tick,
        t,
        reason: format!("{err}"),
    }
}

fn controller_failure(err: ControllerError, tick: usize, t: f64) -> Failure {
    Failure {
        tick,
        t,
        reason: format!("{err}"),
    }
}

/// Run one closed-loop simulation.
///
/// Guard trips (singularity, workspace, inconsistent reading) end the run
/// early with the failure recorded in the log; configuration and trajectory
/// problems fail the call outright.
pub fn run_simulation(config: &ScenarioConfig) -> Result<SimLog, SimError> {
    config.validate()?;
    let (traj, _duration) = resolve_trajectory(config)?;
    let dt = 1.0 / config.f_s;
    let n = traj.len() - 1;
    let cmds = derive_human_commands(&traj);
    let gains = solve_lqr(&config.control.q_matrix(), &config.control.r_matrix())
        .map_err(|e| SimError::BadConfig(format!("{e}")))?;
    let observer_gains = config.observer_gains();

    // Place the robot so the human starts at the setpoint plus the
    // configured offset, with zero heading offset.
    let human0 = traj.samples[0].pose;
    let rel0 = (
        config.control.x_d + config.initial_offset[0],
        config.control.y_d + config.initial_offset[1],
    );
    let (sin0, cos0) = human0.theta().sin_cos();
    let mut robot = Pose2::new(
        human0.x - (cos0 * rel0.0 - sin0 * rel0.1),
        human0.y - (sin0 * rel0.0 + cos0 * rel0.1),
        human0.theta(),
    );

    let mut quantized_arm = config.arm;
    quantized_arm.consistency_tol = config.quantization.consistency_tol;

    let mut observer = ObserverState::default();
    let mut pid_state = PidState::default();
    let mut wheels = WheelPair::default();
    let mut wheel_pi = WheelPiState::default();
    let mut v_prev = (0.0, 0.0);
    let mut log = SimLog {
        f_s: config.f_s,
        records: Vec::with_capacity(n + 1),
        failure: None,
    };

    for tick in 0..=n {
        let t = traj.samples[tick].t;
        let human = traj.samples[tick].pose;
        let relative = world_to_robot(&human, &robot);

        // Sensing: relative pose -> encoder reading -> measured pose.
        let measured_pose = (|| -> Result<Pose2, FrameError> {
            let reading = arm_inverse(&relative, &config.arm)?;
            match config.sensing {
                Sensing::Ideal => arm_forward(&reading, &config.arm),
                Sensing::Quantized => {
                    let q = quantize_reading(
                        &reading,
                        config.quantization.angular_counts_per_rev,
                        config.quantization.linear_resolution,
                    );
                    arm_forward(&q, &quantized_arm)
                }
            }
        })();
        let measured_pose = match measured_pose {
            Ok(p) => p,
            Err(err) => {
                log.failure = Some(frame_failure(err, tick, t));
                return Ok(log);
            }
        };
        let measured = (measured_pose.x, measured_pose.y);

        let d_true = true_disturbance(&cmds[tick], robot.theta());

        // Observe: LESO driven by the previous tick's virtual command, or
        // the oracle feed in validation runs.
        let estimate = match config.estimator {
            Estimator::Leso => {
                observer = if tick == 0 {
                    ObserverState::from_measurement(measured.0, measured.1)
                } else {
                    leso_step(&observer, measured, v_prev, &observer_gains, dt)
                };
                observer
            }
            Estimator::TrueDisturbance => ObserverState {
                x_hat: measured.0,
                y_hat: measured.1,
                d_x_hat: d_true.d_x,
                d_y_hat: d_true.d_y,
            },
        };

        let e = ErrorState::from_measurement(&measured_pose, &config.control);
        let step = match config.controller {
            ControllerKind::Proposed => {
                control_step(&measured_pose, &estimate, &gains, &config.control)
            }
            ControllerKind::Pid => pid_step(
                &e,
                &mut pid_state,
                &config.pid,
                &measured_pose,
                &config.control,
                dt,
            ),
        };
        let (u, v): (RobotCommand, VirtualCommand) = match step {
            Ok(pair) => pair,
            Err(err) => {
                log.failure = Some(controller_failure(err, tick, t));
                return Ok(log);
            }
        };

        log.records.push(Record {
            t,
            human,
            robot,
            relative,
            measured,
            observer: estimate,
            d_true,
            v: v.total(),
            u,
            e,
        });
        v_prev = v.total();

        // Actuate and integrate up to the next tick.
        if tick < n {
            match config.fidelity {
                Fidelity::Kinematic => {
                    robot = robot_step(&robot, &u, dt);
                }
                Fidelity::Dynamic => {
                    let targets = inverse_diff_drive(&u, &config.actuator);
                    let volts =
                        wheel_pi.update(&targets, &wheels, &config.wheel_pi, &config.actuator, dt);
                    let next = actuator_step(&wheels, &volts, &config.actuator, dt);
                    // Advance the pose with the interval-average wheel speeds.
                    let mid = WheelPair::new(
                        (wheels.left + next.left) / 2.0,
                        (wheels.right + next.right) / 2.0,
                    );
                    robot = robot_step(&robot, &diff_drive(&mid, &config.actuator), dt);
                    wheels = next;
                }
            }
        }
    }
    Ok(log)
}
