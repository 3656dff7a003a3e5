//! Continuous-control idealization of the closed loop: the control law is
//! re-evaluated inside every integrator stage instead of being held between
//! ticks. Because the feedback linearization is exact, the tracking error of
//! this system follows `e_dot = -K_e e` to integrator accuracy, which makes
//! the harness the reference for validating the control law against its
//! closed-form error response.

use crate::controller::{decouple, feedback, feedforward, ControllerConfig, ControllerError, ErrorState, GainMatrix};
use crate::frames::Pose2;
use crate::plant::{coupled_derivative, true_disturbance, HumanCommand};

/// Tracking error sampled along an ideal run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdealSample {
    pub t: f64,
    pub e_x: f64,
    pub e_y: f64,
}

/// Integrate the ideal closed loop with the true disturbance fed forward.
///
/// State is (relative x, relative y, robot heading); the human input is an
/// arbitrary function of time. Errors are sampled on the `1/f_s` grid.
pub fn run_ideal_following(
    human: impl Fn(f64) -> HumanCommand,
    gains: &GainMatrix,
    config: &ControllerConfig,
    initial_offset: (f64, f64),
    duration: f64,
    f_s: f64,
) -> Result<Vec<IdealSample>, ControllerError> {
    assert!(f_s > 0.0 && duration > 0.0);
    let dt = 1.0 / f_s;
    let n = (duration * f_s).round() as usize;
    let mut state = [
        config.x_d + initial_offset.0,
        config.y_d + initial_offset.1,
        0.0, // robot heading
    ];
    let mut samples = Vec::with_capacity(n + 1);

    let derivative = |t: f64, s: &[f64; 3]| -> Result<[f64; 3], ControllerError> {
        let rel = Pose2::new(s[0], s[1], 0.0);
        let cmd_h = human(t);
        let d = true_disturbance(&cmd_h, s[2]);
        let e = ErrorState {
            e_x: s[0] - config.x_d,
            e_y: s[1] - config.y_d,
        };
        let v_b = feedback(&e, gains);
        let v_f = feedforward(&d);
        let u = decouple((v_b[0] + v_f[0], v_b[1] + v_f[1]), &rel, config)?;
        let (dx, dy, _) = coupled_derivative(&rel, &u, &cmd_h, s[2]);
        Ok([dx, dy, u.w])
    };

    for k in 0..=n {
        let t = k as f64 * dt;
        samples.push(IdealSample {
            t,
            e_x: state[0] - config.x_d,
            e_y: state[1] - config.y_d,
        });
        if k == n {
            break;
        }
        let k1 = derivative(t, &state)?;
        let mid1 = advance(&state, &k1, dt / 2.0);
        let k2 = derivative(t + dt / 2.0, &mid1)?;
        let mid2 = advance(&state, &k2, dt / 2.0);
        let k3 = derivative(t + dt / 2.0, &mid2)?;
        let end = advance(&state, &k3, dt);
        let k4 = derivative(t + dt, &end)?;
        for i in 0..3 {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(samples)
}

fn advance(state: &[f64; 3], deriv: &[f64; 3], h: f64) -> [f64; 3] {
    [
        state[0] + h * deriv[0],
        state[1] + h * deriv[1],
        state[2] + h * deriv[2],
    ]
}
