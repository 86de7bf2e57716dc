//! Kinematic bicycle model (front-axle reference point) with the steering
//! angle reparameterized through a scaled sigmoid, so the single input bound
//! `|u| <= u_max` is the only constraint left.

use crate::error::{Error, Result};
use crate::Point;

/// `zeta` is clamped to this magnitude to keep `1 / phi'(zeta)` finite.
pub const ZETA_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Forward speed (m/s).
    pub speed: f64,
    /// Wheelbase (m).
    pub wheelbase: f64,
    /// Steering angle bound (rad).
    pub delta_max: f64,
    /// Steering-rate bound (rad/s).
    pub u_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            speed: 5.0,
            wheelbase: 3.0,
            delta_max: 0.6,
            u_max: 1.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if pos(self.speed)
            && pos(self.wheelbase)
            && pos(self.u_max)
            && pos(self.delta_max)
            && self.delta_max < std::f64::consts::FRAC_PI_2
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid vehicle parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub zeta: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, theta: f64, zeta: f64) -> Self {
        VehicleState { x, y, theta, zeta }
    }

    /// State with steering angle `delta` (must satisfy `|delta| < delta_max`).
    pub fn with_steering(p: Point, theta: f64, delta: f64, params: &VehicleParams) -> Result<Self> {
        Ok(VehicleState::new(p[0], p[1], theta, inverse_sigmoid(delta, params.delta_max)?))
    }

    pub fn position(&self) -> Point {
        [self.x, self.y]
    }

    pub fn steering(&self, params: &VehicleParams) -> f64 {
        sigmoid_steer(self.zeta, params.delta_max)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite() && self.zeta.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.theta, self.zeta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        VehicleState::new(a[0], a[1], a[2], a[3])
    }
}

/// `phi(zeta) = delta_max (2 / (1 + e^-zeta) - 1)`, evaluated as
/// `delta_max tanh(zeta / 2)`.
pub fn sigmoid_steer(zeta: f64, delta_max: f64) -> f64 {
    delta_max * (0.5 * zeta).tanh()
}

/// `phi'(zeta) = 2 delta_max e^-|zeta| / (1 + e^-|zeta|)^2`.
pub fn sigmoid_slope(zeta: f64, delta_max: f64) -> f64 {
    let e = (-zeta.abs()).exp();
    2.0 * delta_max * e / ((1.0 + e) * (1.0 + e))
}

pub fn inverse_sigmoid(delta: f64, delta_max: f64) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::NonFinite("steering angle"));
    }
    if delta.abs() >= delta_max {
        return Err(Error::InvalidArgument(format!(
            "steering angle {delta} outside the open interval (-{delta_max}, {delta_max})"
        )));
    }
    Ok(2.0 * (delta / delta_max).atanh())
}

/// Drift field `f(x)`.
pub fn drift(s: &VehicleState, params: &VehicleParams) -> [f64; 4] {
    let delta = s.steering(params);
    let psi = s.theta + delta;
    [
        params.speed * psi.cos(),
        params.speed * psi.sin(),
        params.speed * delta.sin() / params.wheelbase,
        0.0,
    ]
}

/// Input field `g(x)`; only the `zeta` entry is nonzero.
pub fn input_field(s: &VehicleState, params: &VehicleParams) -> [f64; 4] {
    [0.0, 0.0, 0.0, 1.0 / sigmoid_slope(s.zeta, params.delta_max)]
}

/// `f(x) + g(x) u`.
pub fn dynamics(s: &VehicleState, u: f64, params: &VehicleParams) -> [f64; 4] {
    let mut d = drift(s, params);
    d[3] = u / sigmoid_slope(s.zeta, params.delta_max);
    d
}

/// Unmodified bicycle model in `(x, y, theta, delta)` with `delta' = u`.
pub fn steering_angle_dynamics(s: [f64; 4], u: f64, params: &VehicleParams) -> [f64; 4] {
    let psi = s[2] + s[3];
    [
        params.speed * psi.cos(),
        params.speed * psi.sin(),
        params.speed * s[3].sin() / params.wheelbase,
        u,
    ]
}

/// Generic classical Runge-Kutta step.
pub fn rk4(x: [f64; 4], dt: f64, mut f: impl FnMut([f64; 4]) -> [f64; 4]) -> [f64; 4] {
    let add = |a: [f64; 4], k: [f64; 4], h: f64| std::array::from_fn(|i| a[i] + h * k[i]);
    let k1 = f(x);
    let k2 = f(add(x, k1, 0.5 * dt));
    let k3 = f(add(x, k2, 0.5 * dt));
    let k4 = f(add(x, k3, dt));
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// One RK4 step with `u` held constant. `zeta` is clamped to
/// `[-ZETA_LIMIT, ZETA_LIMIT]` at every stage and after the step.
pub fn step_rk4(s: &VehicleState, u: f64, dt: f64, params: &VehicleParams) -> VehicleState {
    debug_assert!(dt > 0.0);
    let clamp = |mut a: [f64; 4]| {
        a[3] = a[3].clamp(-ZETA_LIMIT, ZETA_LIMIT);
        a
    };
    let next = rk4(s.to_array(), dt, |a| {
        dynamics(&VehicleState::from_array(clamp(a)), u, params)
    });
    VehicleState::from_array(clamp(next))
}
