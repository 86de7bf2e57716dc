//! Input-constrained control barrier function of depth two built on a
//! learned distance regressor, and the explicit safety filter it induces.
//!
//! With `h0 = d(x_f, y_f) - beta` and the bicycle drift `f` / input field
//! `g`, the stack is
//!
//! ```text
//! h1 = L_f h0 + a0 h0                        (L_g h0 = 0)
//! h2 = L_f h1 - |L_g h1| u_max + a1 h1
//! ```
//!
//! and the filter enforces `L_f h2 + L_g h2 u + a2 h2 >= 0`.
//!
//! Every term below is written in terms of the planar velocity
//! `v = V (cos psi, sin psi)`, its normal `n = V (-sin psi, cos psi)`,
//! `psi = theta + delta` and the yaw rate `omega = V sin(delta) / L`.
//! The factors `phi'(zeta)` introduced by differentiating in `zeta` cancel
//! against `g = (0, 0, 0, 1 / phi')`, so `L_g h1 = grad d . n`.

mod filter;
mod naive;
mod verify;

pub use filter::{decide, FilterDecision, OVERRIDE_TOLERANCE, RANK_TOLERANCE};
pub use verify::{Axis, GridRegion, ValidityReport, ValidityRow};

use crate::error::{Error, Result};
use crate::svr::{DerivativeBundle, SvrModel};
use crate::vehicle::{VehicleParams, VehicleState};

/// Class-K gains `(a0, a1, a2)` in 1/s, used as `a_i(h) = a_i h`.
pub type Alphas = [f64; 3];

#[derive(Debug, Clone)]
pub struct BarrierStack {
    model: SvrModel,
    beta: f64,
    alphas: Alphas,
    params: VehicleParams,
}

/// Barrier values and Lie derivatives at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BarrierEval {
    pub h: [f64; 3],
    pub lf_h1: f64,
    pub lg_h1: f64,
    pub lf_h2: f64,
    pub lg_h2: f64,
}

impl BarrierEval {
    /// `L_f h2 + L_g h2 u + a2 h2`
    pub fn constraint(&self, u: f64, alpha2: f64) -> f64 {
        self.lf_h2 + self.lg_h2 * u + alpha2 * self.h[2]
    }

    pub fn in_safe_set(&self) -> bool {
        self.h.iter().all(|&h| h >= 0.0)
    }
}

/// Sign with `sign(0) = 0`.
#[inline]
pub(crate) fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl BarrierStack {
    /// Depth is fixed at two.
    pub const DEPTH: usize = 2;

    pub fn new(model: SvrModel, beta: f64, alphas: Alphas, params: VehicleParams) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be >= 0, got {beta}")));
        }
        if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(format!("class-K gains must be positive, got {alphas:?}")));
        }
        params.validate()?;
        Ok(BarrierStack {
            model,
            beta,
            alphas,
            params,
        })
    }

    pub fn model(&self) -> &SvrModel {
        &self.model
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alphas(&self) -> Alphas {
        self.alphas
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn h0(&self, s: &VehicleState) -> f64 {
        self.model.predict(s.position()) - self.beta
    }

    pub fn h1(&self, s: &VehicleState) -> f64 {
        self.evaluate(s).h[1]
    }

    pub fn h2(&self, s: &VehicleState) -> f64 {
        self.evaluate(s).h[2]
    }

    /// `(L_f h2, L_g h2)`
    pub fn lie_h2(&self, s: &VehicleState) -> (f64, f64) {
        let e = self.evaluate(s);
        (e.lf_h2, e.lg_h2)
    }

    /// Full evaluation from one batched pass over the support vectors.
    pub fn evaluate(&self, s: &VehicleState) -> BarrierEval {
        let bundle = self.model.derivatives(s.position());
        self.evaluate_with(s, &bundle)
    }

    /// Evaluation from precomputed regressor derivatives at `s.position()`.
    pub fn evaluate_with(&self, s: &VehicleState, d: &DerivativeBundle) -> BarrierEval {
        let p = &self.params;
        let [a0, a1, _] = self.alphas;
        let delta = s.steering(p);
        let psi = s.theta + delta;
        let (sp, cp) = psi.sin_cos();
        let v = [p.speed * cp, p.speed * sp];
        let n = [-p.speed * sp, p.speed * cp];
        let omega = p.speed * delta.sin() / p.wheelbase;
        let omega_delta = p.speed * delta.cos() / p.wheelbase;

        let gv = d.gradient_dot(v);
        let gn = d.gradient_dot(n);
        let hvv = d.hessian_form(v, v);
        let hnv = d.hessian_form(n, v);
        let tvvv = d.third_contract(v, v, v);

        let h0 = d.value - self.beta;
        let h1 = gv + a0 * h0;
        let lf_h1 = hvv + a0 * gv + omega * gn;
        let lg_h1 = gn;
        let h2 = lf_h1 - lg_h1.abs() * p.u_max + a1 * h1;

        let s1 = sign0(lg_h1);
        // d h2 / d(x_f, y_f) contracted with v
        let dh2_dp_v = tvvv + a0 * hvv + omega * hnv - p.u_max * s1 * hnv + a1 * (hvv + a0 * gv);
        let dh2_dtheta = 2.0 * hnv + a0 * gn - omega * gv + p.u_max * s1 * gv + a1 * gn;
        let lf_h2 = dh2_dp_v + dh2_dtheta * omega;
        // (d h2 / d zeta) / phi'(zeta)
        let lg_h2 = dh2_dtheta + gn * omega_delta;

        BarrierEval {
            h: [h0, h1, h2],
            lf_h1,
            lg_h1,
            lf_h2,
            lg_h2,
        }
    }

    /// Explicit minimally invasive filter of `u_nom`.
    pub fn safety_filter(&self, s: &VehicleState, u_nom: f64) -> Result<FilterDecision> {
        check_inputs(s, u_nom, &self.params)?;
        let e = self.evaluate(s);
        Ok(decide(&e, u_nom, self.alphas[2], self.params.u_max))
    }

    /// Same contract as [`safety_filter`](Self::safety_filter), evaluated with
    /// per-entry support-vector loops and the generic state-space chain rule.
    pub fn naive_filter(&self, s: &VehicleState, u_nom: f64) -> Result<FilterDecision> {
        check_inputs(s, u_nom, &self.params)?;
        let e = naive::evaluate(self, s);
        Ok(decide(&e, u_nom, self.alphas[2], self.params.u_max))
    }
}

fn check_inputs(s: &VehicleState, u_nom: f64, p: &VehicleParams) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::NonFinite("vehicle state"));
    }
    if !u_nom.is_finite() {
        return Err(Error::NonFinite("nominal input"));
    }
    if u_nom.abs() > p.u_max {
        return Err(Error::InvalidArgument(format!(
            "nominal input {u_nom} exceeds u_max {}",
            p.u_max
        )));
    }
    Ok(())
}
