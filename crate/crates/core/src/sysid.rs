//! Actuator model identification: fit the per-wheel first-order gain and
//! time constant from voltage/velocity logs by nonlinear least squares
//! (Levenberg-Marquardt with a finite-difference Jacobian), and the forward
//! response simulation used both by the fit and for validation plots.

use crate::plant::{ActuatorParams, WheelModel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use std::io::BufRead;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SysIdError {
    #[error("log is degenerate: {0}")]
    DegenerateLog(String),
    #[error("log is invalid: {0}")]
    InvalidLog(String),
    #[error("csv schema error at line {line}: {message}")]
    SchemaError { line: usize, message: String },
    #[error("time column must be strictly increasing (line {line})")]
    NonMonotoneTime { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Minimum number of samples for a log to be fittable.
pub const MIN_SAMPLES: usize = 50;

/// Recorded voltage and wheel-speed series for both wheels.
#[derive(Clone, Debug, Default)]
pub struct SysIdLog {
    pub time: Vec<f64>,
    pub voltage_left: Vec<f64>,
    pub voltage_right: Vec<f64>,
    pub speed_left: Vec<f64>,
    pub speed_right: Vec<f64>,
}

impl SysIdLog {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn validate(&self) -> Result<(), SysIdError> {
        let n = self.time.len();
        if n < MIN_SAMPLES {
            return Err(SysIdError::InvalidLog(format!(
                "need at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if [
            self.voltage_left.len(),
            self.voltage_right.len(),
            self.speed_left.len(),
            self.speed_right.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return Err(SysIdError::InvalidLog("column lengths differ".into()));
        }
        for i in 1..n {
            if self.time[i] <= self.time[i - 1] {
                return Err(SysIdError::NonMonotoneTime { line: i + 2 });
            }
        }
        Ok(())
    }

    /// Parse a `t,u_left,u_right,v_left,v_right` CSV (SI units).
    pub fn from_csv(path: &Path) -> Result<Self, SysIdError> {
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(SysIdError::SchemaError {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        let expected = "t,u_left,u_right,v_left,v_right";
        if header.trim() != expected {
            return Err(SysIdError::SchemaError {
                line: 1,
                message: format!("header must be `{expected}`, got `{}`", header.trim()),
            });
        }
        let mut log = SysIdLog::default();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(SysIdError::SchemaError {
                    line: idx + 1,
                    message: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let mut parsed = [0.0; 5];
            for (k, f) in fields.iter().enumerate() {
                parsed[k] = f.trim().parse::<f64>().map_err(|_| SysIdError::SchemaError {
                    line: idx + 1,
                    message: format!("cannot parse `{f}` as a number"),
                })?;
            }
            log.time.push(parsed[0]);
            log.voltage_left.push(parsed[1]);
            log.voltage_right.push(parsed[2]);
            log.speed_left.push(parsed[3]);
            log.speed_right.push(parsed[4]);
        }
        log.validate()?;
        Ok(log)
    }

    /// Write the log in the canonical CSV schema.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t,u_left,u_right,v_left,v_right\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.time[i],
                self.voltage_left[i],
                self.voltage_right[i],
                self.speed_left[i],
                self.speed_right[i]
            ));
        }
        out
    }
}

/// Forward-simulate one wheel's first-order response over the log's voltage
/// series, starting from the first measured speed, with exact per-interval
/// exponential updates (voltage held between samples).
pub fn simulate_wheel_response(
    model: &WheelModel,
    time: &[f64],
    voltage: &[f64],
    v0: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(time.len());
    let mut v = v0;
    out.push(v);
    for i in 1..time.len() {
        let dt = time[i] - time[i - 1];
        let target = model.gain * voltage[i - 1];
        v = target + (v - target) * (-dt / model.time_constant).exp();
        out.push(v);
    }
    out
}

/// Predicted wheel speeds for both wheels under the given parameters.
pub fn simulate_response(params: &ActuatorParams, log: &SysIdLog) -> (Vec<f64>, Vec<f64>) {
    (
        simulate_wheel_response(&params.left, &log.time, &log.voltage_left, log.speed_left[0]),
        simulate_wheel_response(
            &params.right,
            &log.time,
            &log.voltage_right,
            log.speed_right[0],
        ),
    )
}

/// Result of a two-wheel fit.
#[derive(Clone, Copy, Debug)]
pub struct FitResult {
    /// Fitted per-wheel models; the wheel track is carried over from the
    /// initial guess (it is not identifiable from speed logs).
    pub params: ActuatorParams,
    /// Root-mean-square residual over both wheels, m/s.
    pub rmse: f64,
    /// Total accepted-or-rejected LM iterations across both wheels.
    pub iterations: usize,
    /// True when both wheel fits reached the gradient tolerance.
    pub converged: bool,
}

const GRADIENT_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 200;

struct WheelFit {
    model: WheelModel,
    sse: f64,
    iterations: usize,
    converged: bool,
}

fn sse(model: &WheelModel, time: &[f64], voltage: &[f64], measured: &[f64]) -> f64 {
    let predicted = simulate_wheel_response(model, time, voltage, measured[0]);
    predicted
        .iter()
        .zip(measured)
        .map(|(p, m)| (m - p) * (m - p))
        .sum()
}

/// Levenberg-Marquardt over (ln K, ln tau); the log-space parameterization
/// keeps both parameters positive.
fn fit_wheel(
    time: &[f64],
    voltage: &[f64],
    measured: &[f64],
    guess: &WheelModel,
) -> Result<WheelFit, SysIdError> {
    if voltage.iter().all(|u| u.abs() < 1e-12) {
        return Err(SysIdError::DegenerateLog(
            "voltage series has no excitation".into(),
        ));
    }
    let model_at = |theta: &[f64; 2]| WheelModel {
        gain: theta[0].exp(),
        time_constant: theta[1].exp(),
    };
    let residuals = |theta: &[f64; 2]| -> Vec<f64> {
        let predicted = simulate_wheel_response(&model_at(theta), time, voltage, measured[0]);
        predicted
            .iter()
            .zip(measured)
            .map(|(p, m)| m - p)
            .collect()
    };

    let mut theta = [guess.gain.ln(), guess.time_constant.ln()];
    let mut r = residuals(&theta);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let fd_step = 1e-6;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Central finite-difference Jacobian of the predictions, d pred / d theta.
        let mut jac = [vec![0.0; r.len()], vec![0.0; r.len()]];
        for p in 0..2 {
            let mut plus = theta;
            plus[p] += fd_step;
            let mut minus = theta;
            minus[p] -= fd_step;
            let rp = residuals(&plus);
            let rm = residuals(&minus);
            for i in 0..r.len() {
                // residual = measured - predicted, so d pred = -(d residual).
                jac[p][i] = -(rp[i] - rm[i]) / (2.0 * fd_step);
            }
        }
        // Normal equations J'J delta = J'r for the 2-parameter problem.
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for i in 0..r.len() {
            for p in 0..2 {
                jtr[p] += jac[p][i] * r[i];
                for q in 0..2 {
                    jtj[p][q] += jac[p][i] * jac[q][i];
                }
            }
        }
        let grad_norm = jtr[0].hypot(jtr[1]);
        if grad_norm < GRADIENT_TOL {
            converged = true;
            break;
        }
        let a = [
            [jtj[0][0] + lambda * jtj[0][0].max(1e-12), jtj[0][1]],
            [jtj[1][0], jtj[1][1] + lambda * jtj[1][1].max(1e-12)],
        ];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.abs() < 1e-300 {
            return Err(SysIdError::DegenerateLog(
                "normal equations are singular (insufficient excitation)".into(),
            ));
        }
        let delta = [
            (a[1][1] * jtr[0] - a[0][1] * jtr[1]) / det,
            (a[0][0] * jtr[1] - a[1][0] * jtr[0]) / det,
        ];
        let candidate = [theta[0] + delta[0], theta[1] + delta[1]];
        let r_new = residuals(&candidate);
        let cost_new: f64 = r_new.iter().map(|v| v * v).sum();
        if cost_new < cost {
            theta = candidate;
            r = r_new;
            cost = cost_new;
            lambda = (lambda / 10.0).max(1e-12);
        } else {
            lambda = (lambda * 10.0).min(1e12);
        }
    }

    Ok(WheelFit {
        model: model_at(&theta),
        sse: cost,
        iterations,
        converged,
    })
}

/// Fit both wheels' first-order models from a log.
///
/// Returns best-so-far parameters with `converged = false` when the gradient
/// tolerance was not reached; fails with `DegenerateLog` when the log has no
/// excitation.
pub fn fit_actuator(log: &SysIdLog, initial_guess: &ActuatorParams) -> Result<FitResult, SysIdError> {
    log.validate()?;
    if initial_guess.left.gain <= 0.0
        || initial_guess.left.time_constant <= 0.0
        || initial_guess.right.gain <= 0.0
        || initial_guess.right.time_constant <= 0.0
    {
        return Err(SysIdError::InvalidLog(
            "initial gain and time constant must be positive".into(),
        ));
    }
    let left = fit_wheel(
        &log.time,
        &log.voltage_left,
        &log.speed_left,
        &initial_guess.left,
    )?;
    let right = fit_wheel(
        &log.time,
        &log.voltage_right,
        &log.speed_right,
        &initial_guess.right,
    )?;
    let n = 2 * log.len();
    Ok(FitResult {
        params: ActuatorParams {
            left: left.model,
            right: right.model,
            wheel_track: initial_guess.wheel_track,
            max_voltage: initial_guess.max_voltage,
        },
        rmse: ((left.sse + right.sse) / n as f64).sqrt(),
        iterations: left.iterations + right.iterations,
        converged: left.converged && right.converged,
    })
}

/// Root-mean-square error between a parameter set's predictions and the log.
pub fn response_rmse(params: &ActuatorParams, log: &SysIdLog) -> f64 {
    let (left, right) = simulate_response(params, log);
    let sum: f64 = left
        .iter()
        .zip(&log.speed_left)
        .chain(right.iter().zip(&log.speed_right))
        .map(|(p, m)| (m - p) * (m - p))
        .sum();
    (sum / (2 * log.len()) as f64).sqrt()
}

/// Synthesize a persistently exciting voltage/velocity log: both wheels are
/// driven by independent pseudo-random binary sequences switching between
/// +/- `level` volts with dwell times drawn from 0.5..2 s, simulated through
/// `truth`, with optional Gaussian measurement noise on the speeds.
pub fn generate_prbs_log(
    truth: &ActuatorParams,
    duration: f64,
    sample_rate: f64,
    level: f64,
    noise_sigma: f64,
    seed: u64,
) -> SysIdLog {
    assert!(duration > 0.0 && sample_rate > 0.0);
    let mut rng = StdRng::seed_from_u64(seed);
    let n = (duration * sample_rate).round() as usize + 1;
    let dt = 1.0 / sample_rate;
    let mut log = SysIdLog::default();

    let mut make_prbs = |rng: &mut StdRng| -> Vec<f64> {
        let mut u = Vec::with_capacity(n);
        let mut sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut next_switch = rng.random_range(0.5..2.0);
        for i in 0..n {
            let t = i as f64 * dt;
            if t >= next_switch {
                sign = -sign;
                next_switch = t + rng.random_range(0.5..2.0);
            }
            u.push(sign * level);
        }
        u
    };
    log.voltage_left = make_prbs(&mut rng);
    log.voltage_right = make_prbs(&mut rng);
    log.time = (0..n).map(|i| i as f64 * dt).collect();
    log.speed_left = simulate_wheel_response(&truth.left, &log.time, &log.voltage_left, 0.0);
    log.speed_right = simulate_wheel_response(&truth.right, &log.time, &log.voltage_right, 0.0);
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).expect("valid sigma");
        for v in log.speed_left.iter_mut().chain(log.speed_right.iter_mut()) {
            *v += normal.sample(&mut rng);
        }
    }
    log
}
