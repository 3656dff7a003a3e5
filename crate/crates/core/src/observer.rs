//! Two decoupled linear extended state observers (LESO). Each channel
//! augments the relative-position state with the unknown human-input
//! disturbance and estimates both from the measured position and the
//! applied virtual input.

use serde::{Deserialize, Serialize};

/// Observer gains. Each channel has second-order error dynamics
/// `s^2 + beta_odd * s + beta_even`, Hurwitz for strictly positive gains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObserverGains {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl ObserverGains {
    pub fn is_valid(&self) -> bool {
        self.beta1 > 0.0 && self.beta2 > 0.0 && self.beta3 > 0.0 && self.beta4 > 0.0
    }
}

/// Suggested gains for a given sampling frequency: unit position gains and
/// disturbance gains of one third of the sampling frequency.
pub fn default_gains(f_s: f64) -> ObserverGains {
    assert!(f_s > 0.0);
    ObserverGains {
        beta1: 1.0,
        beta2: f_s / 3.0,
        beta3: 1.0,
        beta4: f_s / 3.0,
    }
}

/// Observer state: estimated relative position and estimated disturbance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObserverState {
    pub x_hat: f64,
    pub y_hat: f64,
    pub d_x_hat: f64,
    pub d_y_hat: f64,
}

impl ObserverState {
    /// Seed the position estimates from the first measurement; disturbance
    /// estimates start at zero.
    pub fn from_measurement(x: f64, y: f64) -> Self {
        Self {
            x_hat: x,
            y_hat: y,
            d_x_hat: 0.0,
            d_y_hat: 0.0,
        }
    }
}

/// One explicit-Euler step of both observer channels at the control period.
///
/// Channel form (x shown; y is symmetric with beta3/beta4):
/// `x_hat_dot = v_x + d_x_hat - beta1 * e1`, `d_x_hat_dot = -beta2 * e1`,
/// with innovation `e1 = x_hat - x_measured`.
pub fn leso_step(
    state: &ObserverState,
    measured: (f64, f64),
    virtual_input: (f64, f64),
    gains: &ObserverGains,
    dt: f64,
) -> ObserverState {
    debug_assert!(dt > 0.0);
    let e1 = state.x_hat - measured.0;
    let e2 = state.y_hat - measured.1;
    ObserverState {
        x_hat: state.x_hat + dt * (virtual_input.0 + state.d_x_hat - gains.beta1 * e1),
        d_x_hat: state.d_x_hat + dt * (-gains.beta2 * e1),
        y_hat: state.y_hat + dt * (virtual_input.1 + state.d_y_hat - gains.beta3 * e2),
        d_y_hat: state.d_y_hat + dt * (-gains.beta4 * e2),
    }
}
