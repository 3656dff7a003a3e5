//! Human trajectory representation: CSV replay, resampling to the control
//! rate, and recovery of the human command inputs by finite differences.

use super::SimError;
use crate::frames::{wrap_angle, Pose2};
use crate::plant::HumanCommand;
use std::io::BufRead;
use std::path::Path;

/// One timed human pelvis pose in the world frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub pose: Pose2,
}

/// A time series of human poses with strictly increasing timestamps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn from_samples(samples: Vec<TrajectorySample>) -> Result<Self, SimError> {
        if samples.len() < 2 {
            return Err(SimError::BadParams(
                "trajectory needs at least two samples".into(),
            ));
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].t <= pair[0].t {
                return Err(SimError::NonMonotoneTime { line: i + 3 });
            }
        }
        if samples
            .iter()
            .any(|s| !(s.t.is_finite() && s.pose.x.is_finite() && s.pose.y.is_finite()))
        {
            return Err(SimError::BadParams("trajectory contains non-finite values".into()));
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration covered by the samples, s.
    pub fn span(&self) -> f64 {
        self.samples.last().unwrap().t - self.samples[0].t
    }

    /// Parse a `t,x,y,theta` CSV (SI units, `.` decimals).
    pub fn from_csv(path: &Path) -> Result<Self, SimError> {
        let file = std::fs::File::open(path).map_err(SimError::Io)?;
        let reader = std::io::BufReader::new(file);
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(SimError::Io)?,
            None => {
                return Err(SimError::SchemaError {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        if header.trim() != "t,x,y,theta" {
            return Err(SimError::SchemaError {
                line: 1,
                message: format!("header must be `t,x,y,theta`, got `{}`", header.trim()),
            });
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(SimError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(SimError::SchemaError {
                    line: idx + 1,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let mut parsed = [0.0; 4];
            for (k, f) in fields.iter().enumerate() {
                parsed[k] = f.trim().parse::<f64>().map_err(|_| SimError::SchemaError {
                    line: idx + 1,
                    message: format!("cannot parse `{f}` as a number"),
                })?;
            }
            let prev_t = samples.last().map(|s: &TrajectorySample| s.t);
            if prev_t.is_some_and(|p| parsed[0] <= p) {
                return Err(SimError::NonMonotoneTime { line: idx + 1 });
            }
            samples.push(TrajectorySample {
                t: parsed[0],
                pose: Pose2::new(parsed[1], parsed[2], parsed[3]),
            });
        }
        if samples.len() < 2 {
            return Err(SimError::SchemaError {
                line: 1,
                message: "trajectory needs at least two samples".into(),
            });
        }
        Ok(Self { samples })
    }

    /// Resample onto the uniform grid `k / f_s`, linearly interpolating
    /// position and shortest-arc interpolating heading. Output times are
    /// re-based so the trajectory starts at t = 0.
    pub fn resample(&self, f_s: f64) -> Trajectory {
        assert!(f_s > 0.0);
        let t0 = self.samples[0].t;
        let n = (self.span() * f_s + 1e-9).floor() as usize;
        let mut out = Vec::with_capacity(n + 1);
        let mut seg = 0;
        for k in 0..=n {
            let t_rel = k as f64 / f_s;
            let t = t0 + t_rel;
            while seg + 2 < self.samples.len() && self.samples[seg + 1].t < t {
                seg += 1;
            }
            let a = &self.samples[seg];
            let b = &self.samples[seg + 1];
            let frac = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
            let pose = Pose2::new(
                a.pose.x + frac * (b.pose.x - a.pose.x),
                a.pose.y + frac * (b.pose.y - a.pose.y),
                a.pose.theta() + frac * wrap_angle(b.pose.theta() - a.pose.theta()),
            );
            out.push(TrajectorySample { t: t_rel, pose });
        }
        Trajectory { samples: out }
    }
}

/// Load a trajectory CSV and resample it to the control rate.
pub fn load_trajectory_csv(path: &Path, f_s: f64) -> Result<Trajectory, SimError> {
    Ok(Trajectory::from_csv(path)?.resample(f_s))
}

/// Recover the human command inputs at every tick of a uniformly sampled
/// trajectory by central finite differences (one-sided at the ends). The
/// translation direction holds its previous value through near-stationary
/// ticks, seeded from the initial heading.
pub fn derive_human_commands(traj: &Trajectory) -> Vec<HumanCommand> {
    let n = traj.len();
    let mut out = Vec::with_capacity(n);
    if n < 2 {
        return out;
    }
    let poses: Vec<&Pose2> = traj.samples.iter().map(|s| &s.pose).collect();
    let times: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let mut delta_prev = poses[0].theta();
    for k in 0..n {
        let (lo, hi) = match k {
            0 => (0, 1),
            k if k == n - 1 => (n - 2, n - 1),
            k => (k - 1, k + 1),
        };
        let dt_span = times[hi] - times[lo];
        let vx = (poses[hi].x - poses[lo].x) / dt_span;
        let vy = (poses[hi].y - poses[lo].y) / dt_span;
        let speed = vx.hypot(vy);
        let delta = if speed < 1e-6 {
            delta_prev
        } else {
            vy.atan2(vx)
        };
        delta_prev = delta;
        out.push(HumanCommand {
            speed,
            delta,
            yaw_rate: wrap_angle(poses[hi].theta() - poses[lo].theta()) / dt_span,
        });
    }
    out
}
