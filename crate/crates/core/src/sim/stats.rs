//! Tracking-error statistics over an evaluation window, and the
//! percentage-reduction arithmetic used by comparison reports.

use super::engine::SimLog;
use super::SimError;
use serde::{Deserialize, Serialize};

/// Mean and maximum absolute tracking errors, reported in centimeters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub avg_abs_e_x_cm: f64,
    pub avg_abs_e_y_cm: f64,
    pub max_abs_e_x_cm: f64,
    pub max_abs_e_y_cm: f64,
    /// Start of the evaluation window, s.
    pub window_start_s: f64,
}

/// Walking-onset speed threshold, m/s.
const ONSET_SPEED: f64 = 0.1;
/// How long the speed must stay above the threshold, s.
const ONSET_HOLD: f64 = 0.5;

/// First time the human's speed exceeds 0.1 m/s sustained for 0.5 s.
/// Returns `None` when the log never shows sustained walking (e.g. the
/// in-place mode); callers then evaluate the whole log.
pub fn walk_onset(log: &SimLog) -> Option<f64> {
    let hold_ticks = (ONSET_HOLD * log.f_s).round() as usize;
    let mut run_start: Option<usize> = None;
    for (i, r) in log.records.iter().enumerate() {
        // The disturbance norm equals the human speed.
        if r.d_true.norm() > ONSET_SPEED {
            let start = *run_start.get_or_insert(i);
            if i - start + 1 >= hold_ticks {
                return Some(log.records[start].t);
            }
        } else {
            run_start = None;
        }
    }
    None
}

/// Window start to use for statistics: the explicit override when given,
/// otherwise the detected walk onset, otherwise the start of the log.
pub fn resolve_window_start(log: &SimLog, explicit: Option<f64>) -> f64 {
    explicit.or_else(|| walk_onset(log)).unwrap_or(0.0)
}

/// Mean and max of |e_x|, |e_y| over ticks with `t >= window_start`.
pub fn compute_stats(log: &SimLog, window_start: f64) -> Result<ErrorStats, SimError> {
    let window: Vec<_> = log
        .records
        .iter()
        .filter(|r| r.t >= window_start)
        .collect();
    if window.is_empty() {
        return Err(SimError::EmptyWindow {
            window_start,
            end: log.end_time(),
        });
    }
    let n = window.len() as f64;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut max_x = 0.0f64;
    let mut max_y = 0.0f64;
    for r in &window {
        sum_x += r.e.e_x.abs();
        sum_y += r.e.e_y.abs();
        max_x = max_x.max(r.e.e_x.abs());
        max_y = max_y.max(r.e.e_y.abs());
    }
    Ok(ErrorStats {
        avg_abs_e_x_cm: 100.0 * sum_x / n,
        avg_abs_e_y_cm: 100.0 * sum_y / n,
        max_abs_e_x_cm: 100.0 * max_x,
        max_abs_e_y_cm: 100.0 * max_y,
        window_start_s: window_start,
    })
}

/// Percentage reduction of `proposed` relative to `baseline`:
/// `(1 - proposed/baseline) * 100`.
pub fn reduction_percent(baseline: f64, proposed: f64) -> f64 {
    (1.0 - proposed / baseline) * 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ErrorState;
    use crate::frames::Pose2;
    use crate::observer::ObserverState;
    use crate::plant::{Disturbance, RobotCommand};
    use crate::sim::engine::Record;
    use approx::assert_abs_diff_eq;

    fn log_with_errors(e_x: &[f64], speed: f64) -> SimLog {
        let records = e_x
            .iter()
            .enumerate()
            .map(|(i, &ex)| Record {
                t: i as f64 / 200.0,
                human: Pose2::origin(),
                robot: Pose2::origin(),
                relative: Pose2::new(0.55, 0.0, 0.0),
                measured: (0.55, 0.0),
                observer: ObserverState::default(),
                d_true: Disturbance { d_x: speed, d_y: 0.0 },
                v: (0.0, 0.0),
                u: RobotCommand::zero(),
                e: ErrorState { e_x: ex, e_y: 0.0 },
            })
            .collect();
        SimLog {
            f_s: 200.0,
            records,
            failure: None,
        }
    }

    #[test]
    fn constant_error_stats() {
        let log = log_with_errors(&vec![0.01; 400], 0.0);
        let s = compute_stats(&log, 0.0).unwrap();
        assert_abs_diff_eq!(s.avg_abs_e_x_cm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.max_abs_e_x_cm, 1.0, epsilon = 1e-12);
        assert_eq!(s.avg_abs_e_y_cm, 0.0);
    }

    #[test]
    fn alternating_error_stats() {
        let e: Vec<f64> = (0..400).map(|i| if i % 2 == 0 { 0.02 } else { -0.02 }).collect();
        let log = log_with_errors(&e, 0.0);
        let s = compute_stats(&log, 0.0).unwrap();
        assert_abs_diff_eq!(s.avg_abs_e_x_cm, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.max_abs_e_x_cm, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_window_rejected() {
        let log = log_with_errors(&vec![0.01; 100], 0.0);
        assert!(matches!(
            compute_stats(&log, 10.0),
            Err(SimError::EmptyWindow { .. })
        ));
    }

    #[test]
    fn window_start_filters_early_errors() {
        let mut e = vec![0.10; 200];
        e.extend(vec![0.01; 200]);
        let log = log_with_errors(&e, 0.0);
        let s = compute_stats(&log, 1.0).unwrap();
        assert_abs_diff_eq!(s.avg_abs_e_x_cm, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn onset_detected_for_sustained_walking() {
        // 1 s standing, then walking.
        let mut log = log_with_errors(&vec![0.0; 600], 0.0);
        for r in log.records.iter_mut().skip(200) {
            r.d_true = Disturbance { d_x: 0.8, d_y: 0.0 };
        }
        let onset = walk_onset(&log).unwrap();
        assert_abs_diff_eq!(onset, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn onset_ignores_short_bursts() {
        // Bursts of 0.3 s never satisfy the 0.5 s hold.
        let mut log = log_with_errors(&vec![0.0; 1200], 0.0);
        for (i, r) in log.records.iter_mut().enumerate() {
            if (i / 60) % 2 == 0 {
                r.d_true = Disturbance { d_x: 0.5, d_y: 0.0 };
            }
        }
        assert_eq!(walk_onset(&log), None);
        assert_eq!(resolve_window_start(&log, None), 0.0);
        assert_eq!(resolve_window_start(&log, Some(2.0)), 2.0);
    }

    #[test]
    fn reduction_percent_reference_values() {
        // Reference report arithmetic, two-decimal rounding.
        assert_eq!(format!("{:.2}", reduction_percent(1.79, 0.28)), "84.36");
        assert_eq!(format!("{:.2}", reduction_percent(3.43, 0.50)), "85.42");
        assert_eq!(reduction_percent(2.0, 2.0), 0.0);
    }
}
