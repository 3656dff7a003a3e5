//! The following control law: LQR feedback synthesized from the
//! continuous-time algebraic Riccati equation, pseudoinverse feedforward
//! cancelling the estimated human-input disturbance, and the
//! feedback-linearizing decoupling map back to physical robot commands.
//! A per-axis PID routed through the same decoupling map serves as the
//! comparison baseline.

use crate::frames::Pose2;
use crate::observer::ObserverState;
use crate::plant::{Disturbance, RobotCommand};
use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Input matrix of the linearized error dynamics (`e_dot = B_v * v + B_d * d`).
pub const B_V: Matrix2<f64> = Matrix2::new(1.0, 0.0, 0.0, 1.0);
/// Disturbance matrix of the linearized error dynamics.
pub const B_D: Matrix2<f64> = Matrix2::new(1.0, 0.0, 0.0, 1.0);

#[derive(Debug, Error, PartialEq)]
pub enum ControllerError {
    #[error("{name} must be symmetric positive definite")]
    NotPositiveDefinite { name: &'static str },
    /// The relative x distance reached the mechanical guard; the decoupling
    /// matrix is (near-)singular and the run must halt.
    #[error("singularity guard: relative x = {x:.4} m at or below epsilon = {epsilon:.4} m")]
    SingularityGuard { x: f64, epsilon: f64 },
}

/// Controller configuration: LQR weights, following setpoint, the
/// singularity guard, and actuation limits.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Diagonal of the error weight Q.
    pub q: [f64; 2],
    /// Diagonal of the input weight R.
    pub r: [f64; 2],
    /// Desired relative offset along the robot X axis, m.
    pub x_d: f64,
    /// Desired relative offset along the robot Y axis, m.
    pub y_d: f64,
    /// Hard lower bound on relative x before the run is aborted, m.
    pub x_guard_epsilon: f64,
    pub v_max: f64,
    pub w_max: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            q: [200.0, 200.0],
            r: [1.0, 1.0],
            x_d: 0.55,
            y_d: 0.0,
            x_guard_epsilon: 0.05,
            v_max: 1.5,
            w_max: 2.0,
        }
    }
}

impl ControllerConfig {
    pub fn q_matrix(&self) -> Matrix2<f64> {
        Matrix2::from_diagonal(&Vector2::new(self.q[0], self.q[1]))
    }

    pub fn r_matrix(&self) -> Matrix2<f64> {
        Matrix2::from_diagonal(&Vector2::new(self.r[0], self.r[1]))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.q.iter().any(|&v| v <= 0.0) || self.r.iter().any(|&v| v <= 0.0) {
            return Err("controller weights q and r must be positive".into());
        }
        if self.x_guard_epsilon <= 0.0 {
            return Err("x_guard_epsilon must be positive".into());
        }
        if self.x_d <= self.x_guard_epsilon {
            return Err(format!(
                "x_d = {} must exceed x_guard_epsilon = {}",
                self.x_d, self.x_guard_epsilon
            ));
        }
        if self.v_max <= 0.0 || self.w_max <= 0.0 {
            return Err("saturation limits must be positive".into());
        }
        Ok(())
    }
}

/// Synthesized gains: the CARE solution P and the state feedback K_e.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainMatrix {
    pub k_e: Matrix2<f64>,
    pub p: Matrix2<f64>,
    /// Frobenius norm of the CARE residual at the returned P.
    pub residual: f64,
}

impl GainMatrix {
    pub fn k_x(&self) -> f64 {
        self.k_e[(0, 0)]
    }

    pub fn k_y(&self) -> f64 {
        self.k_e[(1, 1)]
    }
}

fn check_spd(m: &Matrix2<f64>, name: &'static str) -> Result<(), ControllerError> {
    let scale = m.amax().max(1.0);
    let symmetric = (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * scale;
    // Sylvester criterion for 2x2.
    let positive = m[(0, 0)] > 0.0 && m.determinant() > 0.0;
    if symmetric && positive {
        Ok(())
    } else {
        Err(ControllerError::NotPositiveDefinite { name })
    }
}

/// Principal square root of a 2x2 SPD matrix: `(M + sqrt(det) I) / sqrt(tr + 2 sqrt(det))`.
fn spd_sqrt(m: &Matrix2<f64>) -> Matrix2<f64> {
    let s = m.determinant().sqrt();
    let t = (m.trace() + 2.0 * s).sqrt();
    (m + Matrix2::identity() * s) / t
}

fn spd_inverse(m: &Matrix2<f64>) -> Matrix2<f64> {
    let det = m.determinant();
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
}

/// Residual of the CARE `A'P + PA - P Bv R^-1 Bv' P + Q` for A = 0, Bv = I.
pub fn care_residual(p: &Matrix2<f64>, q: &Matrix2<f64>, r: &Matrix2<f64>) -> f64 {
    (q - p * spd_inverse(r) * p).norm()
}

/// Solve the LQR problem for the double-channel single-integrator error
/// dynamics (A = 0, Bv = I): P solves `P R^-1 P = Q`, and `K_e = R^-1 P`.
pub fn solve_lqr(q: &Matrix2<f64>, r: &Matrix2<f64>) -> Result<GainMatrix, ControllerError> {
    check_spd(q, "Q")?;
    check_spd(r, "R")?;
    let diagonal = q[(0, 1)] == 0.0 && q[(1, 0)] == 0.0 && r[(0, 1)] == 0.0 && r[(1, 0)] == 0.0;
    let p = if diagonal {
        // p_ii = sqrt(q_ii * r_ii), k_ii = sqrt(q_ii / r_ii).
        Matrix2::from_diagonal(&Vector2::new(
            (q[(0, 0)] * r[(0, 0)]).sqrt(),
            (q[(1, 1)] * r[(1, 1)]).sqrt(),
        ))
    } else {
        // P = R^1/2 (R^-1/2 Q R^-1/2)^1/2 R^1/2.
        let r_half = spd_sqrt(r);
        let r_half_inv = spd_inverse(&r_half);
        let inner = spd_sqrt(&(r_half_inv * q * r_half_inv));
        r_half * inner * r_half
    };
    let k_e = spd_inverse(r) * p;
    Ok(GainMatrix {
        k_e,
        p,
        residual: care_residual(&p, q, r),
    })
}

/// Tracking error of the controlled relative coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorState {
    pub e_x: f64,
    pub e_y: f64,
}

impl ErrorState {
    pub fn from_measurement(measured: &Pose2, config: &ControllerConfig) -> Self {
        Self {
            e_x: measured.x - config.x_d,
            e_y: measured.y - config.y_d,
        }
    }
}

/// Virtual command of the linearized system, split into its feedback and
/// feedforward components (`v = v_b + v_f`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VirtualCommand {
    pub v_b: [f64; 2],
    pub v_f: [f64; 2],
}

impl VirtualCommand {
    pub fn v_x(&self) -> f64 {
        self.v_b[0] + self.v_f[0]
    }

    pub fn v_y(&self) -> f64 {
        self.v_b[1] + self.v_f[1]
    }

    pub fn total(&self) -> (f64, f64) {
        (self.v_x(), self.v_y())
    }
}

/// LQR feedback component `v_b = -K_e e`.
pub fn feedback(e: &ErrorState, gains: &GainMatrix) -> [f64; 2] {
    let v = -gains.k_e * Vector2::new(e.e_x, e.e_y);
    [v[0], v[1]]
}

/// Feedforward component for arbitrary input/disturbance matrices:
/// `v_f = -pinv(B_v) B_d d_hat`.
pub fn feedforward_with(b_v: &Matrix2<f64>, b_d: &Matrix2<f64>, d_hat: &Disturbance) -> [f64; 2] {
    let pinv = b_v
        .pseudo_inverse(1e-12)
        .expect("2x2 pseudoinverse is always defined");
    let v = -pinv * b_d * Vector2::new(d_hat.d_x, d_hat.d_y);
    [v[0], v[1]]
}

/// Feedforward disturbance cancellation with the system's B matrices.
pub fn feedforward(d_hat: &Disturbance) -> [f64; 2] {
    feedforward_with(&B_V, &B_D, d_hat)
}

fn saturate(v: f64, limit: f64) -> f64 {
    v.clamp(-limit, limit)
}

fn guard_x(relative: &Pose2, config: &ControllerConfig) -> Result<(), ControllerError> {
    if relative.x <= config.x_guard_epsilon {
        Err(ControllerError::SingularityGuard {
            x: relative.x,
            epsilon: config.x_guard_epsilon,
        })
    } else {
        Ok(())
    }
}

/// Invert the decoupling matrix: `u = M(x)^-1 (v - b(x))` with
/// `M = [[-1, y], [0, -x]]` and `b = 0`, then saturate to the actuation
/// limits. Fails when the relative x distance is at or below the guard.
pub fn decouple(
    v: (f64, f64),
    relative: &Pose2,
    config: &ControllerConfig,
) -> Result<RobotCommand, ControllerError> {
    guard_x(relative, config)?;
    let v_r = -v.0 - relative.y / relative.x * v.1;
    let w_r = -v.1 / relative.x;
    Ok(RobotCommand {
        v: saturate(v_r, config.v_max),
        w: saturate(w_r, config.w_max),
    })
}

/// Full control step: error from the measured relative pose, feedback plus
/// feedforward, then the decoupling map. Returns the physical command and
/// the virtual command (the latter feeds the observer on the next tick).
pub fn control_step(
    measured: &Pose2,
    observer: &ObserverState,
    gains: &GainMatrix,
    config: &ControllerConfig,
) -> Result<(RobotCommand, VirtualCommand), ControllerError> {
    let e = ErrorState::from_measurement(measured, config);
    let d_hat = Disturbance {
        d_x: observer.d_x_hat,
        d_y: observer.d_y_hat,
    };
    let v = VirtualCommand {
        v_b: feedback(&e, gains),
        v_f: feedforward(&d_hat),
    };
    let u = decouple(v.total(), measured, config)?;
    Ok((u, v))
}

/// The explicit closed form of the proposed law,
/// `v_r = (y/x)(k_y e_y + d_y_hat) + k_x e_x + d_x_hat`,
/// `w_r = (1/x)(k_y e_y + d_y_hat)`,
/// kept as an independent route for cross-checking the composed pipeline.
pub fn explicit_law(
    measured: &Pose2,
    d_hat: &Disturbance,
    k_x: f64,
    k_y: f64,
    config: &ControllerConfig,
) -> Result<RobotCommand, ControllerError> {
    guard_x(measured, config)?;
    let e = ErrorState::from_measurement(measured, config);
    let lateral = k_y * e.e_y + d_hat.d_y;
    let v_r = measured.y / measured.x * lateral + k_x * e.e_x + d_hat.d_x;
    let w_r = lateral / measured.x;
    Ok(RobotCommand {
        v: saturate(v_r, config.v_max),
        w: saturate(w_r, config.w_max),
    })
}

/// Per-axis PID gains for the baseline controller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisPid {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

/// Baseline gains, tuned by grid search minimizing the mean error norm on
/// the in-place scenario (see the `tune_pid` example).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PidGains {
    pub x: AxisPid,
    pub y: AxisPid,
}

impl Default for PidGains {
    fn default() -> Self {
        let axis = AxisPid {
            kp: 30.0,
            ki: 10.0,
            kd: 0.6,
        };
        Self { x: axis, y: axis }
    }
}

/// Integrator and previous-error memory of the PID baseline.
#[derive(Clone, Copy, Debug, Default)]
pub struct PidState {
    integral: [f64; 2],
    prev_error: Option<[f64; 2]>,
}

/// One step of the per-axis PID baseline routed through the same decoupling
/// map as the proposed controller. The integrator freezes while either
/// physical output is saturated (conditional anti-windup).
pub fn pid_step(
    e: &ErrorState,
    state: &mut PidState,
    gains: &PidGains,
    relative: &Pose2,
    config: &ControllerConfig,
    dt: f64,
) -> Result<(RobotCommand, VirtualCommand), ControllerError> {
    debug_assert!(dt > 0.0);
    guard_x(relative, config)?;
    let err = [e.e_x, e.e_y];
    let deriv = match state.prev_error {
        Some(prev) => [(err[0] - prev[0]) / dt, (err[1] - prev[1]) / dt],
        None => [0.0, 0.0],
    };
    let axis = [gains.x, gains.y];
    let candidate = [
        state.integral[0] + err[0] * dt,
        state.integral[1] + err[1] * dt,
    ];
    let virtual_for = |integral: &[f64; 2]| {
        [
            -(axis[0].kp * err[0] + axis[0].ki * integral[0] + axis[0].kd * deriv[0]),
            -(axis[1].kp * err[1] + axis[1].ki * integral[1] + axis[1].kd * deriv[1]),
        ]
    };
    let v = virtual_for(&candidate);
    let raw_v_r = -v[0] - relative.y / relative.x * v[1];
    let raw_w_r = -v[1] / relative.x;
    let saturated = raw_v_r.abs() > config.v_max || raw_w_r.abs() > config.w_max;
    let v = if saturated {
        // Keep the previous integral; recompute the virtual command with it.
        virtual_for(&state.integral)
    } else {
        state.integral = candidate;
        v
    };
    state.prev_error = Some(err);
    let u = decouple((v[0], v[1]), relative, config)?;
    Ok((
        u,
        VirtualCommand {
            v_b: v,
            v_f: [0.0, 0.0],
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn lqr_reproduces_reference_gain() {
        let q = Matrix2::from_diagonal(&Vector2::new(200.0, 200.0));
        let r = Matrix2::identity();
        let g = solve_lqr(&q, &r).unwrap();
        assert_abs_diff_eq!(g.k_x(), 14.1421, epsilon = 1e-4);
        assert_abs_diff_eq!(g.k_y(), 14.1421, epsilon = 1e-4);
        assert!(g.residual < 1e-9, "residual {}", g.residual);
    }

    #[test]
    fn lqr_identity_weights() {
        let g = solve_lqr(&Matrix2::identity(), &Matrix2::identity()).unwrap();
        assert_abs_diff_eq!(g.k_x(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.k_y(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lqr_diagonal_follows_sqrt_rule() {
        let q = Matrix2::from_diagonal(&Vector2::new(4.0, 9.0));
        let g = solve_lqr(&q, &Matrix2::identity()).unwrap();
        assert_abs_diff_eq!(g.k_x(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.k_y(), 3.0, epsilon = 1e-12);
        assert!(g.residual < 1e-12);
    }

    #[test]
    fn lqr_general_spd_weights() {
        let q = Matrix2::new(5.0, 1.0, 1.0, 3.0);
        let r = Matrix2::new(2.0, 0.5, 0.5, 1.0);
        let g = solve_lqr(&q, &r).unwrap();
        assert!(g.residual < 1e-9, "residual {}", g.residual);
        // P symmetric positive definite.
        assert_abs_diff_eq!(g.p[(0, 1)], g.p[(1, 0)], epsilon = 1e-12);
        assert!(g.p[(0, 0)] > 0.0 && g.p.determinant() > 0.0);
        // K_e = R^-1 P.
        let k_expected = spd_inverse(&r) * g.p;
        assert!((g.k_e - k_expected).norm() < 1e-12);
    }

    #[test]
    fn lqr_rejects_non_spd() {
        let bad = Matrix2::new(1.0, 2.0, 2.0, 1.0); // det < 0
        assert_eq!(
            solve_lqr(&bad, &Matrix2::identity()),
            Err(ControllerError::NotPositiveDefinite { name: "Q" })
        );
        let asym = Matrix2::new(1.0, 0.5, 0.0, 1.0);
        assert_eq!(
            solve_lqr(&Matrix2::identity(), &asym),
            Err(ControllerError::NotPositiveDefinite { name: "R" })
        );
    }

    #[test]
    fn care_residual_randomized_spd() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let a = Matrix2::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let q = a.transpose() * a + Matrix2::identity() * rng.random_range(0.01..1.0);
            let b = Matrix2::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let r = b.transpose() * b + Matrix2::identity() * rng.random_range(0.01..1.0);
            let g = solve_lqr(&q, &r).unwrap();
            assert!(g.residual < 1e-9, "residual {} for q={q:?} r={r:?}", g.residual);
        }
    }

    #[test]
    fn feedback_examples() {
        let g = solve_lqr(
            &Matrix2::from_diagonal(&Vector2::new(200.0, 200.0)),
            &Matrix2::identity(),
        )
        .unwrap();
        assert_eq!(feedback(&ErrorState::default(), &g), [0.0, 0.0]);
        let v = feedback(&ErrorState { e_x: 0.1, e_y: 0.0 }, &g);
        assert_abs_diff_eq!(v[0], -1.41421, epsilon = 1e-4);
        assert_eq!(v[1], 0.0);

        let g23 = solve_lqr(
            &Matrix2::from_diagonal(&Vector2::new(4.0, 9.0)),
            &Matrix2::identity(),
        )
        .unwrap();
        let v = feedback(
            &ErrorState {
                e_x: -0.05,
                e_y: 0.02,
            },
            &g23,
        );
        assert_abs_diff_eq!(v[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], -0.06, epsilon = 1e-12);
    }

    #[test]
    fn feedforward_examples() {
        assert_eq!(feedforward(&Disturbance::zero()), [0.0, 0.0]);
        let v = feedforward(&Disturbance { d_x: 0.5, d_y: -0.2 });
        assert_eq!(v, [-0.5, 0.2]);

        let b_d = Matrix2::from_diagonal(&Vector2::new(2.0, 1.0));
        let v = feedforward_with(&B_V, &b_d, &Disturbance { d_x: 0.5, d_y: 0.3 });
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], -0.3, epsilon = 1e-12);
    }

    fn wide_open() -> ControllerConfig {
        ControllerConfig {
            v_max: 1e9,
            w_max: 1e9,
            ..Default::default()
        }
    }

    #[test]
    fn decouple_examples() {
        let cfg = wide_open();
        let u = decouple((0.0, 0.0), &Pose2::new(0.8, 0.1, 0.0), &cfg).unwrap();
        assert_eq!(u, RobotCommand::zero());

        let u = decouple((1.0, 2.0), &Pose2::new(1.0, 0.5, 0.0), &cfg).unwrap();
        assert_abs_diff_eq!(u.v, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.w, -2.0, epsilon = 1e-12);
        // M u = v must hold for the inverse.
        assert_abs_diff_eq!(-u.v + 0.5 * u.w, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(-1.0 * u.w, 2.0, epsilon = 1e-12);

        assert!(matches!(
            decouple((1.0, 1.0), &Pose2::new(0.0, 0.0, 0.0), &cfg),
            Err(ControllerError::SingularityGuard { .. })
        ));
    }

    #[test]
    fn control_step_at_setpoint_is_zero() {
        let cfg = ControllerConfig::default();
        let gains = solve_lqr(&cfg.q_matrix(), &cfg.r_matrix()).unwrap();
        let measured = Pose2::new(cfg.x_d, cfg.y_d, 0.0);
        let (u, v) = control_step(&measured, &ObserverState::default(), &gains, &cfg).unwrap();
        assert_eq!(u, RobotCommand::zero());
        assert_eq!(v.total(), (0.0, 0.0));
    }

    #[test]
    fn control_step_x_error_example() {
        // Human 0.1 m too far ahead: robot accelerates toward it.
        let cfg = ControllerConfig {
            x_d: 0.8,
            ..wide_open()
        };
        let gains = solve_lqr(&cfg.q_matrix(), &cfg.r_matrix()).unwrap();
        let measured = Pose2::new(0.9, 0.0, 0.0);
        let (u, _) = control_step(&measured, &ObserverState::default(), &gains, &cfg).unwrap();
        assert_abs_diff_eq!(u.v, 1.41421, epsilon = 1e-4);
        assert_eq!(u.w, 0.0);
    }

    #[test]
    fn composed_pipeline_matches_explicit_law() {
        let cfg = ControllerConfig {
            x_d: 0.55,
            ..wide_open()
        };
        let gains = solve_lqr(&cfg.q_matrix(), &cfg.r_matrix()).unwrap();
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..1000 {
            let measured = Pose2::new(
                rng.random_range(0.3..1.2),
                rng.random_range(-0.35..0.35),
                rng.random_range(-0.7..0.7),
            );
            let obs = ObserverState {
                x_hat: measured.x,
                y_hat: measured.y,
                d_x_hat: rng.random_range(-1.5..1.5),
                d_y_hat: rng.random_range(-1.5..1.5),
            };
            let (u, _) = control_step(&measured, &obs, &gains, &cfg).unwrap();
            let d_hat = Disturbance {
                d_x: obs.d_x_hat,
                d_y: obs.d_y_hat,
            };
            let u_ref = explicit_law(&measured, &d_hat, gains.k_x(), gains.k_y(), &cfg).unwrap();
            assert_abs_diff_eq!(u.v, u_ref.v, epsilon = 1e-12);
            assert_abs_diff_eq!(u.w, u_ref.w, epsilon = 1e-12);
        }
    }

    #[test]
    fn pid_zero_error_zero_output() {
        let cfg = ControllerConfig::default();
        let gains = PidGains::default();
        let mut state = PidState::default();
        let rel = Pose2::new(cfg.x_d, 0.0, 0.0);
        for _ in 0..10 {
            let (u, _) = pid_step(&ErrorState::default(), &mut state, &gains, &rel, &cfg, 0.005)
                .unwrap();
            assert_eq!(u, RobotCommand::zero());
        }
    }

    #[test]
    fn pid_proportional_only_closed_form() {
        let cfg = wide_open();
        let gains = PidGains {
            x: AxisPid {
                kp: 5.0,
                ki: 0.0,
                kd: 0.0,
            },
            y: AxisPid {
                kp: 5.0,
                ki: 0.0,
                kd: 0.0,
            },
        };
        let mut state = PidState::default();
        let e = ErrorState { e_x: 0.1, e_y: 0.0 };
        let rel = Pose2::new(cfg.x_d + 0.1, 0.0, 0.0);
        for _ in 0..5 {
            let (u, v) = pid_step(&e, &mut state, &gains, &rel, &cfg, 0.005).unwrap();
            assert_abs_diff_eq!(v.v_x(), -0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(u.v, 0.5, epsilon = 1e-12);
            assert_eq!(u.w, 0.0);
        }
    }

    #[test]
    fn pid_integral_removes_steady_state_error() {
        // Closed-loop on the linearized channel: e_dot = v + d with constant
        // unknown d; integral action drives e to zero.
        let cfg = wide_open();
        let gains = PidGains {
            x: AxisPid {
                kp: 8.0,
                ki: 20.0,
                kd: 0.0,
            },
            y: AxisPid {
                kp: 8.0,
                ki: 20.0,
                kd: 0.0,
            },
        };
        let mut state = PidState::default();
        let dt = 0.005;
        let d = 0.4;
        let mut x = cfg.x_d;
        for _ in 0..(8.0 / dt) as usize {
            let rel = Pose2::new(x, 0.0, 0.0);
            let e = ErrorState::from_measurement(&rel, &cfg);
            let (u, _) = pid_step(&e, &mut state, &gains, &rel, &cfg, dt).unwrap();
            // x_dot = -v_r + d on-axis (y = 0, w plays no role).
            x += (-u.v + d) * dt;
        }
        assert!(
            (x - cfg.x_d).abs() < 1e-3,
            "steady-state error {}",
            x - cfg.x_d
        );
    }

    proptest! {
        #[test]
        fn prop_saturation_safety(
            vx in -100.0..100.0f64,
            vy in -100.0..100.0f64,
            x in 0.06..1.2f64,
            y in -0.35..0.35f64,
        ) {
            let cfg = ControllerConfig::default();
            let u = decouple((vx, vy), &Pose2::new(x, y, 0.0), &cfg).unwrap();
            prop_assert!(u.v.abs() <= cfg.v_max);
            prop_assert!(u.w.abs() <= cfg.w_max);
        }

        #[test]
        fn prop_decouple_inverts_m(
            vx in -5.0..5.0f64,
            vy in -5.0..5.0f64,
            x in 0.3..1.2f64,
            y in -0.35..0.35f64,
        ) {
            let cfg = wide_open();
            let u = decouple((vx, vy), &Pose2::new(x, y, 0.0), &cfg).unwrap();
            // M u = v with M = [[-1, y], [0, -x]].
            prop_assert!(((-u.v + y * u.w) - vx).abs() < 1e-12);
            prop_assert!(((-x * u.w) - vy).abs() < 1e-12);
        }
    }
}
